#pragma once

// Field files: <base>.f64 holds the point values as raw little-endian
// float64 in row-major order, <base>.json is a sidecar with the grid shape.
// CSV export is provided for 1-D and 2-D inspection.

#include <string>

#include "fmfg/field.hpp"

namespace fmfg {

// writes <base>.f64 and <base>.json; name is recorded in the sidecar
void write_field(const std::string& base, const SpectralField& f, const std::string& name);

// reads the pair back; throws std::runtime_error on any mismatch
SpectralField read_field(const std::string& base);

// 1-D: x,value per row; 2-D: x1,x2,value; 3-D is rejected
void write_field_csv(const std::string& path, const SpectralField& f, int precision = 17);

}  // namespace fmfg

#include "fmfg/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

// raw doubles are written verbatim, so the file format is the host byte order
static_assert(std::endian::native == std::endian::little, "field files are little-endian");

namespace fmfg {

void write_field(const std::string& base, const SpectralField& f, const std::string& name) {
  const std::vector<double>& vals = f.values();
  {
    std::ofstream out(base + ".f64", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + base + ".f64 for writing");
    out.write(reinterpret_cast<const char*>(vals.data()),
              static_cast<std::streamsize>(vals.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write to " + base + ".f64");
  }
  nlohmann::json side{{"format", "f64"},
                      {"endianness", "little"},
                      {"dim", f.grid().dim},
                      {"n", f.grid().n},
                      {"count", vals.size()},
                      {"name", name}};
  std::ofstream out(base + ".json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + base + ".json for writing");
  out << side.dump(2) << "\n";
}

SpectralField read_field(const std::string& base) {
  nlohmann::json side;
  {
    std::ifstream in(base + ".json");
    if (!in) throw std::runtime_error("cannot open " + base + ".json");
    try {
      in >> side;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("bad sidecar " + base + ".json: " + e.what());
    }
  }
  if (side.value("format", "") != "f64" || side.value("endianness", "") != "little")
    throw std::runtime_error(base + ".json does not describe a little-endian f64 field");
  PeriodicGrid grid(side.at("dim").get<int>(), side.at("n").get<int>());
  std::size_t count = side.at("count").get<std::size_t>();
  if (count != grid.size())
    throw std::runtime_error(base + ".json count does not match the grid shape");

  std::ifstream in(base + ".f64", std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open " + base + ".f64");
  auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != count * sizeof(double))
    throw std::runtime_error(base + ".f64 holds " + std::to_string(bytes) + " bytes, expected " +
                             std::to_string(count * sizeof(double)));
  std::vector<double> vals(count);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("short read from " + base + ".f64");
  return SpectralField::from_values(grid, std::move(vals));
}

void write_field_csv(const std::string& path, const SpectralField& f, int precision) {
  const PeriodicGrid& g = f.grid();
  if (g.dim > 2) throw std::invalid_argument("CSV export supports 1-D and 2-D fields only");
  if (precision < 1 || precision > 17) throw std::invalid_argument("CSV precision must lie in [1, 17]");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << (g.dim == 1 ? "x,value\n" : "x1,x2,value\n");
  const std::vector<double>& vals = f.values();
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.*g%c", precision, v, sep);
    out << buf;
  };
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::array<double, 3> x = g.point(i);
    put(x[0], ',');
    if (g.dim == 2) put(x[1], ',');
    put(vals[i], '\n');
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace fmfg

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fftw3.h>
#include <json.hpp>

#include "fmfg/acceptance.hpp"
#include "fmfg/config.hpp"
#include "fmfg/coupling.hpp"
#include "fmfg/expr.hpp"
#include "fmfg/fokker_planck.hpp"
#include "fmfg/hjb.hpp"
#include "fmfg/io.hpp"
#include "fmfg/mfg.hpp"
#include "fmfg/spectral.hpp"
#include "fmfg/variational.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fmfg;

constexpr const char* version_string = "0.1.0";

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Timer {
 public:
  void start() { t0_ = std::chrono::steady_clock::now(); }
  double stop_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

// writes run artifacts and enforces the reload invariant on every field file
struct Emitter {
  fs::path dir;
  OutputConfig out;
  json timings = json::object();
  std::vector<std::string> artifacts;

  void field(const std::string& name, const SpectralField& f) {
    std::string base = (dir / name).string();
    write_field(base, f, name);
    artifacts.push_back(name + ".f64");
    artifacts.push_back(name + ".json");
    SpectralField back = read_field(base);
    bool same = back.grid().dim == f.grid().dim && back.grid().n == f.grid().n &&
                back.size() == f.size() && back.finite();
    for (std::size_t i = 0; same && i < f.size(); ++i)
      same = back.values()[i] == f.values()[i];
    if (!same)
      throw InvariantViolation("field '" + name + "' failed its reload check; the file at " +
                               base + ".f64 does not reproduce the solver output");
    if ((out.format == "csv" || out.format == "both") && f.grid().dim <= 2) {
      write_field_csv(base + ".csv", f, out.precision);
      artifacts.push_back(name + ".csv");
    }
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream o(dir / name, std::ios::trunc);
    if (!o) throw std::runtime_error("cannot open " + (dir / name).string() + " for writing");
    o << j.dump(2) << "\n";
    artifacts.push_back(name);
  }

  // diagnostics carry no timings, so reruns with the same config and seed
  // reproduce the file byte for byte; wall clock lives in the manifest only
  void diagnostics(const json& j) { write_json("diagnostics.json", j); }

  void manifest(const std::string& subcommand, std::uint64_t hash, std::uint64_t seed,
                const json& summary) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
    json m{{"subcommand", subcommand},
           {"config_hash", hex},
           {"seed", seed},
           {"versions", {{"fmfg", version_string}, {"fftw", std::string(fftw_version)}}},
           {"timings_ms", timings},
           {"artifacts", artifacts},
           {"summary", summary}};
    std::ofstream o(dir / "run_manifest.json", std::ios::trunc);
    if (!o) throw std::runtime_error("cannot open the run manifest for writing");
    o << m.dump(2) << "\n";
  }
};

json stages_json(const std::vector<MfgStage>& stages) {
  json a = json::array();
  for (const MfgStage& st : stages)
    a.push_back({{"eps", st.eps}, {"iterations", st.iterations}, {"residual", st.residual}});
  return a;
}

SpectralField negated(const SpectralField& f) { return axpby_fields(-1.0, f, 0.0, f); }

int fp_solve_cmd(const RunConfig& cfg, Emitter& em) {
  if (cfg.drift.empty())
    throw ConfigError({"fp-solve needs problem.drift with one expression per dimension"});
  const PeriodicGrid& g = cfg.problem.grid;
  std::vector<SpectralField> comps;
  for (const std::string& e : cfg.drift) comps.push_back(field_from_expression(e, g));
  VectorField b(std::move(comps));

  Timer t;
  t.start();
  FpDiagnostics d;
  SpectralField m = solve_stationary_fp(b, cfg.problem.s, cfg.problem.solver.fp, &d);
  em.timings["solve"] = t.stop_ms();

  em.field("m", m);
  json diag{{"residual", d.residual},
            {"iterations", d.iterations},
            {"min_m", d.min_m},
            {"max_m", d.max_m},
            {"positivity_flagged", d.positivity_flagged},
            {"mass", m.coeffs()[0].real()},
            {"residual_history", d.residual_history}};
  em.diagnostics(diag);
  em.manifest("fp-solve", config_hash(cfg), cfg.seed,
              {{"residual", d.residual}, {"min_m", d.min_m}});
  return 0;
}

int hjb_solve_cmd(const RunConfig& cfg, Emitter& em) {
  if (!cfg.data) throw ConfigError({"hjb-solve needs a problem.data expression"});
  const MfgProblem& p = cfg.problem;
  SpectralField f = field_from_expression(*cfg.data, p.grid);

  Timer t;
  t.start();
  ErgodicSolution sol = solve_ergodic(f, p.hamiltonian, p.s, p.solver.hjb);
  em.timings["solve"] = t.stop_ms();

  em.field("u", sol.u);
  LambdaBounds lb = lambda_bounds(f, p.hamiltonian);
  json diag{{"lambda", sol.lambda},
            {"residual", sol.residual},
            {"grad_norm", sol.grad_norm},
            {"iterations", sol.iterations},
            {"lambda_lo", lb.lo},
            {"lambda_hi", lb.hi}};
  em.diagnostics(diag);
  em.manifest("hjb-solve", config_hash(cfg), cfg.seed,
              {{"lambda", sol.lambda}, {"residual", sol.residual}});
  return 0;
}

json mfg_diagnostics_json(const MfgSolution& sol, const SystemResidual& sys) {
  const MfgDiagnostics& d = sol.diagnostics;
  return json{{"lambda", sol.lambda},
              {"outer_iterations", d.outer_iterations},
              {"hjb_residual", d.hjb_residual},
              {"fp_residual", d.fp_residual},
              {"duality_gap", d.duality_gap},
              {"energy_value", d.energy_value},
              {"sandwich_slack_min", d.sandwich_slack_min},
              {"lambda_history", d.lambda_history},
              {"stages", stages_json(d.stages)},
              {"advisories", d.advisories},
              {"system_residual",
               {{"hjb", sys.hjb}, {"fp", sys.fp}, {"mass_defect", sys.mass_defect}}}};
}

int mfg_solve_cmd(const RunConfig& cfg, Emitter& em) {
  if (!cfg.coupling) throw ConfigError({"mfg-solve needs a problem.coupling section"});
  const MfgProblem& p = cfg.problem;

  Timer t;
  t.start();
  MfgSolution sol = solve_fixed_point(p);
  em.timings["solve"] = t.stop_ms();

  em.field("u", sol.u);
  em.field("m", sol.m);
  for (int d = 0; d < p.grid.dim; ++d) em.field("w" + std::to_string(d + 1), sol.w[d]);
  SystemResidual sys = system_residual(sol, p);
  em.diagnostics(mfg_diagnostics_json(sol, sys));
  em.manifest("mfg-solve", config_hash(cfg), cfg.seed,
              {{"lambda", sol.lambda},
               {"hjb_residual", sys.hjb},
               {"fp_residual", sys.fp}});
  return 0;
}

int mfg_variational_cmd(const RunConfig& cfg, Emitter& em) {
  if (!cfg.coupling) throw ConfigError({"mfg-variational needs a problem.coupling section"});
  const MfgProblem& p = cfg.problem;
  const LocalCoupling* lc = std::get_if<LocalCoupling>(&p.coupling);
  if (lc == nullptr)
    throw ConfigError({"mfg-variational needs a local coupling; nonlocal couplings have no "
                       "energy formulation here"});

  Timer t;
  t.start();
  VariationalDiagnostics vd;
  FlowPair pair = minimize_energy(p, {}, &vd);
  em.timings["minimize"] = t.stop_ms();

  // the value function and ergodic constant come from one value-equation
  // solve against the frozen minimizing density
  t.start();
  SpectralField fstar = eval_local(*lc, pair.m);
  ErgodicSolution value = solve_ergodic(fstar, p.hamiltonian, p.s, p.solver.hjb);
  em.timings["value_recovery"] = t.stop_ms();

  MfgSolution hybrid;
  hybrid.u = value.u;
  hybrid.lambda = value.lambda;
  hybrid.m = pair.m;
  hybrid.w = pair.w;
  double gap = duality_gap(hybrid, *lc, p.hamiltonian);
  double optimality = optimality_check(hybrid, p.hamiltonian);
  VectorField gh = hamiltonian_gradient(value.u, p.hamiltonian);
  std::vector<SpectralField> drift;
  for (int d = 0; d < p.grid.dim; ++d) drift.push_back(negated(gh[d]));
  double fp_res = fp_residual(pair.m, VectorField(std::move(drift)), p.s);

  em.field("u", hybrid.u);
  em.field("m", hybrid.m);
  for (int d = 0; d < p.grid.dim; ++d) em.field("w" + std::to_string(d + 1), hybrid.w[d]);
  json diag{{"lambda", hybrid.lambda},
            {"energy_value", vd.energy},
            {"kinetic", vd.kinetic},
            {"potential", vd.potential},
            {"duality_gap", gap},
            {"optimality", optimality},
            {"iterations", vd.iterations},
            {"grad_norm", vd.grad_norm},
            {"hjb_residual", value.residual},
            {"fp_residual", fp_res},
            {"energy_history", vd.energy_history}};
  em.diagnostics(diag);
  em.manifest("mfg-variational", config_hash(cfg), cfg.seed,
              {{"lambda", hybrid.lambda}, {"energy_value", vd.energy}, {"duality_gap", gap}});
  return 0;
}

int mfg_probe_cmd(const RunConfig& cfg, Emitter& em) {
  if (!cfg.coupling) throw ConfigError({"mfg-probe-uniqueness needs a problem.coupling section"});
  const MfgProblem& p = cfg.problem;

  std::vector<SpectralField> seeds;
  seeds.push_back(unit_density(p.grid));
  for (std::uint64_t k = 0; k < 2; ++k) {
    SpectralField r = band_limited_random(p.grid, 2, cfg.seed + k);
    double scale = r.max_abs() > 0.0 ? 0.3 / r.max_abs() : 0.0;
    SpectralField m = axpby_fields(scale, r, 1.0, unit_density(p.grid));
    m.mutate_coeffs()[0] = cdouble(1.0, 0.0);
    seeds.push_back(std::move(m));
  }

  Timer t;
  t.start();
  UniquenessReport rep = uniqueness_probe(p, seeds);
  em.timings["probe"] = t.stop_ms();

  json diag{{"monotone_hypothesis", rep.monotone_hypothesis},
            {"seeds_attempted", rep.seeds_attempted},
            {"seeds_converged", rep.seeds_converged},
            {"max_m_gap", rep.max_m_gap},
            {"max_lambda_gap", rep.max_lambda_gap},
            {"max_u_gap", rep.max_u_gap},
            {"findings", rep.findings}};
  em.diagnostics(diag);
  em.manifest("mfg-probe-uniqueness", config_hash(cfg), cfg.seed,
              {{"seeds_converged", rep.seeds_converged}, {"max_m_gap", rep.max_m_gap}});
  if (rep.seeds_converged == 0) {
    std::cerr << "no seed converged";
    for (const std::string& f : rep.findings) std::cerr << "\n  " << f;
    std::cerr << "\n";
    return 3;
  }
  return 0;
}

int acceptance_cmd(std::uint64_t seed, Emitter& em) {
  Timer t;
  t.start();
  std::vector<CriterionResult> results = run_acceptance(seed);
  em.timings["suite"] = t.stop_ms();

  bool all = true;
  json list = json::array();
  for (const CriterionResult& r : results) {
    all = all && r.passed;
    std::printf("criterion %2d %-34s %s  %s\n", r.index, r.name.c_str(),
                r.passed ? "pass" : "FAIL", r.detail.c_str());
    list.push_back(
        {{"index", r.index}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  json report{{"seed", seed}, {"all_passed", all}, {"criteria", list}};
  em.write_json("acceptance.json", report);
  em.manifest("acceptance", 0, seed, {{"all_passed", all}});
  return all ? 0 : 4;
}

fs::path resolve_outdir(const std::string& configured, const std::string& override_dir) {
  fs::path dir = override_dir.empty() ? fs::path(configured) : fs::path(override_dir);
  const char* root = std::getenv("FMFG_OUTPUT_ROOT");
  if (root != nullptr && *root != '\0' && dir.is_relative()) dir = fs::path(root) / dir;
  return dir;
}

std::string load_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int dispatch(const std::string& name, const std::string& config_path, bool strict,
             const std::string& outdir_override, std::optional<std::uint64_t> seed_override) {
  if (name == "acceptance") {
    Emitter em;
    em.dir = resolve_outdir("out", outdir_override);
    fs::create_directories(em.dir);
    return acceptance_cmd(seed_override.value_or(0), em);
  }
  RunConfig cfg = parse_config(load_text(config_path), strict);
  if (seed_override) cfg.seed = *seed_override;
  for (const std::string& a : cfg.advisories) std::cerr << "advisory: " << a << "\n";

  Emitter em;
  em.dir = resolve_outdir(cfg.output.directory, outdir_override);
  em.out = cfg.output;
  fs::create_directories(em.dir);

  if (name == "fp-solve") return fp_solve_cmd(cfg, em);
  if (name == "hjb-solve") return hjb_solve_cmd(cfg, em);
  if (name == "mfg-solve") return mfg_solve_cmd(cfg, em);
  if (name == "mfg-variational") return mfg_variational_cmd(cfg, em);
  return mfg_probe_cmd(cfg, em);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stationary fractional mean field games on the periodic torus"};
  app.require_subcommand(1);

  std::string config_path, outdir_override;
  bool strict = false;
  std::optional<std::uint64_t> seed_override;

  const char* names[] = {"fp-solve",        "hjb-solve",          "mfg-solve",
                         "mfg-variational", "mfg-probe-uniqueness"};
  const char* blurbs[] = {
      "solve the stationary transport equation for a prescribed drift",
      "solve the ergodic value equation for prescribed data",
      "solve the coupled system by damped fixed-point iteration",
      "solve the coupled system by minimizing the constrained energy",
      "re-solve from several seeds and compare the solutions"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
    sub->add_flag("--strict", strict, "unknown config keys become errors");
    sub->add_option("-o,--output-dir", outdir_override,
                    "overrides output.directory; FMFG_OUTPUT_ROOT prefixes relative paths");
    sub->add_option("--seed", seed_override, "overrides the config seed");
  }
  CLI::App* acc = app.add_subcommand("acceptance", "run the acceptance suite");
  acc->add_option("--seed", seed_override, "seed for the randomized probes");
  acc->add_option("-o,--output-dir", outdir_override,
                  "report directory; FMFG_OUTPUT_ROOT prefixes relative paths");

  CLI11_PARSE(app, argc, argv);
  std::string sub = app.get_subcommands().front()->get_name();

  try {
    return dispatch(sub, config_path, strict, outdir_override, seed_override);
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    for (const std::string& v : e.violations) std::cerr << "\n  - " << v;
    std::cerr << "\n";
    return 2;
  } catch (const MfgError& e) {
    std::cerr << "solver error (coupled stage): " << e.what() << "\n";
    return 3;
  } catch (const HjbError& e) {
    std::cerr << "solver error (value equation): " << e.what() << "\n";
    return 3;
  } catch (const FpError& e) {
    std::cerr << "solver error (transport equation): " << e.what() << "\n";
    return 3;
  } catch (const VariationalError& e) {
    std::cerr << "solver error (energy minimization): " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error\n  - " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 4;
  }
}

#include "fmfg/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <type_traits>

#include <json.hpp>

#include "fmfg/coupling.hpp"
#include "fmfg/expr.hpp"

namespace fmfg {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Parser {
  std::vector<std::string> violations;
  std::vector<std::string> advisories;
  bool strict = false;

  void flag(std::string msg) { violations.push_back(std::move(msg)); }

  void check_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find_if(allowed.begin(), allowed.end(),
                       [&](const char* k) { return it.key() == k; }) != allowed.end())
        continue;
      std::string full = where.empty() ? it.key() : where + "." + it.key();
      if (strict)
        flag("unknown key '" + full + "'");
      else
        advisories.push_back("ignoring unknown key '" + full + "'");
    }
  }

  const json* section(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return nullptr;
    if (!it->is_object()) {
      flag(where + key + " must be an object");
      return nullptr;
    }
    return &*it;
  }

  template <typename T>
  std::optional<T> typed(const json& obj, const char* key, const std::string& where,
                         const char* kind) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    bool ok;
    if constexpr (std::is_same_v<T, double>)
      ok = it->is_number();
    else if constexpr (std::is_same_v<T, bool>)
      ok = it->is_boolean();
    else if constexpr (std::is_same_v<T, std::string>)
      ok = it->is_string();
    else
      ok = it->is_number_integer();
    if (!ok) {
      flag(where + key + " must be " + kind);
      return std::nullopt;
    }
    return it->get<T>();
  }

  std::optional<double> number(const json& o, const char* k, const std::string& w) {
    return typed<double>(o, k, w, "a number");
  }
  std::optional<long long> integer(const json& o, const char* k, const std::string& w) {
    return typed<long long>(o, k, w, "an integer");
  }
  std::optional<std::string> string(const json& o, const char* k, const std::string& w) {
    return typed<std::string>(o, k, w, "a string");
  }
  std::optional<bool> boolean(const json& o, const char* k, const std::string& w) {
    return typed<bool>(o, k, w, "a boolean");
  }

  // parses expression text, recording grammar errors against the config key
  std::optional<Expression> expression(const std::string& text, const std::string& where) {
    try {
      return parse_expression(text);
    } catch (const std::invalid_argument& e) {
      flag(where + ": " + e.what());
      return std::nullopt;
    }
  }
};

void check_growth(Parser& ps, const RunConfig& cfg) {
  const MfgProblem& p = cfg.problem;
  int N = p.grid.dim;
  std::vector<std::string> fails;
  if (cfg.coupling->kind == "local") {
    GrowthReport gr = validate_growth(p.s, p.hamiltonian.gamma, cfg.coupling->q, N);
    if (!gr.gamma_ok) {
      if (N == 1)
        fails.push_back("Hamiltonian growth bound violated: gamma = " + fmt(p.hamiltonian.gamma) +
                        " exceeds 2s = " + fmt(gr.gamma_bound) + " in one dimension");
      else
        fails.push_back("Hamiltonian growth bound violated: gamma = " + fmt(p.hamiltonian.gamma) +
                        " is not below N/(N-2s+1) = " + fmt(gr.gamma_bound) + " in dimension " +
                        std::to_string(N));
    }
    if (!gr.q_growth_ok)
      fails.push_back("coupling growth bound violated: q = " + fmt(cfg.coupling->q) +
                      " is not below 1 + (2s-1)*gamma/(N*(gamma-1)) = " + fmt(gr.q_growth_bound));
    if (!gr.conjugate_ok)
      fails.push_back("conjugate exponent bound violated: gamma/(gamma-1) = " +
                      fmt(p.hamiltonian.conjugate_exponent()) + " does not exceed N/(2s-1) = " +
                      fmt(gr.conjugate_bound));
  } else if (p.hamiltonian.gamma > 2.0 * p.s) {
    fails.push_back("Hamiltonian growth bound violated: gamma = " + fmt(p.hamiltonian.gamma) +
                    " exceeds 2s = " + fmt(2.0 * p.s) + " for a bounded coupling");
  }
  for (const std::string& f : fails) {
    if (cfg.allow_out_of_regime)
      ps.advisories.push_back("out of regime: " + f + "; convergence is not guaranteed");
    else
      ps.flag(f + " (set problem.allow_out_of_regime to run anyway)");
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error([&] {
        std::string msg = "configuration invalid (" + std::to_string(v.size()) + " violation" +
                          (v.size() == 1 ? "" : "s") + ")";
        for (const std::string& s : v) msg += "\n  - " + s;
        return msg;
      }()),
      violations(std::move(v)) {}

RunConfig parse_config(const std::string& text, bool strict) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  Parser ps;
  ps.strict = strict;
  RunConfig cfg;
  if (!root.is_object()) {
    ps.flag("the top level must be a JSON object");
    throw ConfigError(std::move(ps.violations));
  }
  ps.check_keys(root, "", {"problem", "solver", "output", "seed"});

  double s = cfg.problem.s;
  int dim = 1, n = 64;
  double gamma = 2.0, coeff = 0.5, delta = 0.0;
  std::optional<Expression> potential_expr, kernel_expr, data_expr;
  std::vector<Expression> drift_exprs;

  if (const json* prob = ps.section(root, "problem", "")) {
    ps.check_keys(*prob, "problem",
                  {"s", "grid", "hamiltonian", "coupling", "drift", "data", "allow_out_of_regime"});
    if (auto v = ps.number(*prob, "s", "problem.")) s = *v;
    cfg.allow_out_of_regime =
        ps.boolean(*prob, "allow_out_of_regime", "problem.").value_or(false);

    if (const json* grid = ps.section(*prob, "grid", "problem.")) {
      ps.check_keys(*grid, "problem.grid", {"dim", "n"});
      if (auto v = ps.integer(*grid, "dim", "problem.grid.")) dim = static_cast<int>(*v);
      if (auto v = ps.integer(*grid, "n", "problem.grid.")) n = static_cast<int>(*v);
    }
    if (const json* ham = ps.section(*prob, "hamiltonian", "problem.")) {
      ps.check_keys(*ham, "problem.hamiltonian", {"gamma", "coeff", "smoothing_delta"});
      if (auto v = ps.number(*ham, "gamma", "problem.hamiltonian.")) gamma = *v;
      if (auto v = ps.number(*ham, "coeff", "problem.hamiltonian.")) coeff = *v;
      if (auto v = ps.number(*ham, "smoothing_delta", "problem.hamiltonian.")) delta = *v;
    }
    if (const json* cpl = ps.section(*prob, "coupling", "problem.")) {
      CouplingSpec spec;
      spec.kind = ps.string(*cpl, "kind", "problem.coupling.").value_or("local");
      if (spec.kind == "local") {
        ps.check_keys(*cpl, "problem.coupling", {"kind", "c", "q", "bound_K", "potential"});
        if (auto v = ps.number(*cpl, "c", "problem.coupling.")) spec.c = *v;
        if (auto v = ps.number(*cpl, "q", "problem.coupling.")) spec.q = *v;
        if (auto v = ps.number(*cpl, "bound_K", "problem.coupling.")) spec.bound_K = *v;
        if (spec.q <= 1.0) ps.flag("problem.coupling.q must exceed 1");
        if (spec.bound_K < 0.0) ps.flag("problem.coupling.bound_K must be nonnegative");
      } else if (spec.kind == "nonlocal") {
        ps.check_keys(*cpl, "problem.coupling", {"kind", "kernel", "outer", "potential"});
        if (auto v = ps.string(*cpl, "kernel", "problem.coupling.")) {
          spec.kernel = *v;
          kernel_expr = ps.expression(*v, "problem.coupling.kernel");
        } else {
          ps.flag("problem.coupling.kernel is required for a nonlocal coupling");
        }
        if (const json* outer = ps.section(*cpl, "outer", "problem.coupling.")) {
          ps.check_keys(*outer, "problem.coupling.outer", {"kind", "a", "b"});
          spec.outer_kind = ps.string(*outer, "kind", "problem.coupling.outer.").value_or("identity");
          if (spec.outer_kind != "identity" && spec.outer_kind != "affine" &&
              spec.outer_kind != "saturating")
            ps.flag("problem.coupling.outer.kind must be identity, affine or saturating");
          if (auto v = ps.number(*outer, "a", "problem.coupling.outer.")) spec.outer_a = *v;
          if (auto v = ps.number(*outer, "b", "problem.coupling.outer.")) spec.outer_b = *v;
        }
      } else {
        ps.flag("problem.coupling.kind must be local or nonlocal");
      }
      if (auto v = ps.string(*cpl, "potential", "problem.coupling.")) {
        spec.potential = *v;
        potential_expr = ps.expression(*v, "problem.coupling.potential");
      }
      cfg.coupling = std::move(spec);
    }
    if (auto it = prob->find("drift"); it != prob->end()) {
      if (!it->is_array()) {
        ps.flag("problem.drift must be an array of expressions");
      } else {
        for (std::size_t i = 0; i < it->size(); ++i) {
          const json& entry = (*it)[i];
          std::string where = "problem.drift[" + std::to_string(i) + "]";
          if (!entry.is_string()) {
            ps.flag(where + " must be a string");
            continue;
          }
          cfg.drift.push_back(entry.get<std::string>());
          if (auto e = ps.expression(entry.get<std::string>(), where)) drift_exprs.push_back(*e);
        }
      }
    }
    if (auto v = ps.string(*prob, "data", "problem.")) {
      cfg.data = *v;
      data_expr = ps.expression(*v, "problem.data");
    }
  }

  if (const json* solver = ps.section(root, "solver", "")) {
    SolverConfig& sc = cfg.problem.solver;
    ps.check_keys(*solver, "solver",
                  {"damping", "max_outer", "tol_outer", "eps_schedule", "fp", "hjb"});
    if (auto v = ps.number(*solver, "damping", "solver.")) sc.damping = *v;
    if (auto v = ps.integer(*solver, "max_outer", "solver.")) sc.max_outer = static_cast<int>(*v);
    if (auto v = ps.number(*solver, "tol_outer", "solver.")) sc.tol_outer = *v;
    if (auto it = solver->find("eps_schedule"); it != solver->end()) {
      if (!it->is_array() || std::any_of(it->begin(), it->end(),
                                         [](const json& e) { return !e.is_number(); })) {
        ps.flag("solver.eps_schedule must be an array of numbers");
      } else {
        sc.eps_schedule = it->get<std::vector<double>>();
      }
    }
    if (const json* fp = ps.section(*solver, "fp", "solver.")) {
      ps.check_keys(*fp, "solver.fp", {"tol", "max_iter", "pos_tol", "damping", "anderson_depth"});
      if (auto v = ps.number(*fp, "tol", "solver.fp.")) sc.fp.tol = *v;
      if (auto v = ps.integer(*fp, "max_iter", "solver.fp.")) sc.fp.max_iter = static_cast<int>(*v);
      if (auto v = ps.number(*fp, "pos_tol", "solver.fp.")) sc.fp.pos_tol = *v;
      if (auto v = ps.number(*fp, "damping", "solver.fp.")) sc.fp.damping = *v;
      if (auto v = ps.integer(*fp, "anderson_depth", "solver.fp."))
        sc.fp.anderson_depth = static_cast<int>(*v);
    }
    if (const json* hjb = ps.section(*solver, "hjb", "solver.")) {
      ps.check_keys(*hjb, "solver.hjb",
                    {"tol", "grad_cap", "max_time", "dt_initial", "anderson_depth",
                     "refine_damping", "max_refine"});
      if (auto v = ps.number(*hjb, "tol", "solver.hjb.")) sc.hjb.tol = *v;
      if (auto v = ps.number(*hjb, "grad_cap", "solver.hjb.")) sc.hjb.grad_cap = *v;
      if (auto v = ps.number(*hjb, "max_time", "solver.hjb.")) sc.hjb.max_time = *v;
      if (auto v = ps.number(*hjb, "dt_initial", "solver.hjb.")) sc.hjb.dt_initial = *v;
      if (auto v = ps.integer(*hjb, "anderson_depth", "solver.hjb."))
        sc.hjb.anderson_depth = static_cast<int>(*v);
      if (auto v = ps.number(*hjb, "refine_damping", "solver.hjb.")) sc.hjb.refine_damping = *v;
      if (auto v = ps.integer(*hjb, "max_refine", "solver.hjb."))
        sc.hjb.max_refine = static_cast<int>(*v);
    }
  }

  if (const json* output = ps.section(root, "output", "")) {
    ps.check_keys(*output, "output", {"directory", "format", "precision"});
    if (auto v = ps.string(*output, "directory", "output.")) cfg.output.directory = *v;
    if (auto v = ps.string(*output, "format", "output.")) cfg.output.format = *v;
    if (auto v = ps.integer(*output, "precision", "output."))
      cfg.output.precision = static_cast<int>(*v);
  }
  if (auto it = root.find("seed"); it != root.end()) {
    if (!it->is_number_unsigned())
      ps.flag("seed must be a nonnegative integer");
    else
      cfg.seed = it->get<std::uint64_t>();
  }

  // coupled problems need the open interval; without a coupling the classical
  // endpoint s = 1 stays admissible for the plain fp-solve / hjb-solve paths
  bool s_ok = s > 0.5 && (s < 1.0 || (!cfg.coupling && s == 1.0));
  if (!s_ok) ps.flag("s must lie in (1/2, 1)");
  cfg.problem.s = s;
  bool grid_ok = (dim >= 1 && dim <= 3) && (n >= 4 && n % 2 == 0);
  if (!grid_ok)
    ps.flag("problem.grid needs dim in {1, 2, 3} and even n >= 4, got dim = " +
            std::to_string(dim) + ", n = " + std::to_string(n));
  bool ham_ok = gamma > 1.0 && coeff > 0.0 && delta >= 0.0;
  if (gamma <= 1.0) ps.flag("problem.hamiltonian.gamma must exceed 1");
  if (coeff <= 0.0) ps.flag("problem.hamiltonian.coeff must be positive");
  if (delta < 0.0) ps.flag("problem.hamiltonian.smoothing_delta must be nonnegative");

  const SolverConfig& sc = cfg.problem.solver;
  if (!(sc.damping > 0.0 && sc.damping <= 1.0)) ps.flag("solver.damping must lie in (0, 1]");
  if (sc.max_outer < 1) ps.flag("solver.max_outer must be at least 1");
  if (!(sc.tol_outer > 0.0)) ps.flag("solver.tol_outer must be positive");
  for (std::size_t i = 0; i < sc.eps_schedule.size(); ++i) {
    if (sc.eps_schedule[i] < 0.0) {
      ps.flag("solver.eps_schedule entries must be nonnegative");
      break;
    }
    if (i > 0 && sc.eps_schedule[i] > sc.eps_schedule[i - 1]) {
      ps.flag("solver.eps_schedule must be nonincreasing");
      break;
    }
  }
  if (!(sc.fp.tol > 0.0)) ps.flag("solver.fp.tol must be positive");
  if (sc.fp.max_iter < 1) ps.flag("solver.fp.max_iter must be at least 1");
  if (sc.fp.pos_tol < 0.0) ps.flag("solver.fp.pos_tol must be nonnegative");
  if (!(sc.fp.damping > 0.0 && sc.fp.damping <= 1.0)) ps.flag("solver.fp.damping must lie in (0, 1]");
  if (sc.fp.anderson_depth < 0) ps.flag("solver.fp.anderson_depth must be nonnegative");
  if (!(sc.hjb.tol > 0.0)) ps.flag("solver.hjb.tol must be positive");
  if (!(sc.hjb.grad_cap > 0.0)) ps.flag("solver.hjb.grad_cap must be positive");
  if (!(sc.hjb.max_time > 0.0)) ps.flag("solver.hjb.max_time must be positive");
  if (sc.hjb.anderson_depth < 0) ps.flag("solver.hjb.anderson_depth must be nonnegative");
  if (!(sc.hjb.refine_damping > 0.0 && sc.hjb.refine_damping <= 1.0))
    ps.flag("solver.hjb.refine_damping must lie in (0, 1]");
  if (sc.hjb.max_refine < 1) ps.flag("solver.hjb.max_refine must be at least 1");

  if (cfg.output.format != "field-binary" && cfg.output.format != "csv" &&
      cfg.output.format != "both")
    ps.flag("output.format must be field-binary, csv or both");
  if (cfg.output.precision < 1 || cfg.output.precision > 17)
    ps.flag("output.precision must lie in [1, 17]");
  if (cfg.output.directory.empty()) ps.flag("output.directory must not be empty");

  // assembly; guarded so that only well-formed pieces are constructed
  if (grid_ok) {
    cfg.problem.grid = PeriodicGrid(dim, n);
    if (!cfg.drift.empty() && static_cast<int>(cfg.drift.size()) != dim)
      ps.flag("problem.drift needs exactly " + std::to_string(dim) +
              " component(s) for a " + std::to_string(dim) + "-dimensional grid");
    try {
      for (const Expression& e : drift_exprs) evaluate_expression(e, cfg.problem.grid);
      if (data_expr) evaluate_expression(*data_expr, cfg.problem.grid);
      if (kernel_expr) evaluate_expression(*kernel_expr, cfg.problem.grid);
      if (potential_expr) evaluate_expression(*potential_expr, cfg.problem.grid);
    } catch (const std::invalid_argument& e) {
      ps.flag(e.what());
    }
  }
  if (ham_ok) cfg.problem.hamiltonian = Hamiltonian::power(gamma, coeff, delta);
  if (cfg.coupling && ps.violations.empty()) {
    std::optional<SpectralField> pot;
    if (potential_expr) pot = evaluate_expression(*potential_expr, cfg.problem.grid);
    if (cfg.coupling->kind == "local") {
      cfg.problem.coupling =
          LocalCoupling::make(cfg.coupling->c, cfg.coupling->q, cfg.coupling->bound_K, std::move(pot));
    } else {
      NonlocalCoupling nl;
      nl.kernel = evaluate_expression(*kernel_expr, cfg.problem.grid);
      nl.outer.kind = cfg.coupling->outer_kind == "identity" ? OuterMap::Kind::identity
                      : cfg.coupling->outer_kind == "affine" ? OuterMap::Kind::affine
                                                             : OuterMap::Kind::saturating;
      nl.outer.a = cfg.coupling->outer_a;
      nl.outer.b = cfg.coupling->outer_b;
      nl.potential = std::move(pot);
      cfg.problem.coupling = std::move(nl);
    }
    check_growth(ps, cfg);
  }

  if (!ps.violations.empty()) throw ConfigError(std::move(ps.violations));
  cfg.advisories = std::move(ps.advisories);
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  const MfgProblem& p = cfg.problem;
  json problem{{"s", p.s},
               {"grid", {{"dim", p.grid.dim}, {"n", p.grid.n}}},
               {"hamiltonian",
                {{"gamma", p.hamiltonian.gamma},
                 {"coeff", p.hamiltonian.coeff},
                 {"smoothing_delta", p.hamiltonian.smoothing_delta}}},
               {"allow_out_of_regime", cfg.allow_out_of_regime}};
  if (cfg.coupling) {
    json cpl{{"kind", cfg.coupling->kind}};
    if (cfg.coupling->kind == "local") {
      cpl["c"] = cfg.coupling->c;
      cpl["q"] = cfg.coupling->q;
      cpl["bound_K"] = cfg.coupling->bound_K;
    } else {
      cpl["kernel"] = cfg.coupling->kernel;
      cpl["outer"] = {{"kind", cfg.coupling->outer_kind},
                      {"a", cfg.coupling->outer_a},
                      {"b", cfg.coupling->outer_b}};
    }
    if (cfg.coupling->potential) cpl["potential"] = *cfg.coupling->potential;
    problem["coupling"] = std::move(cpl);
  }
  if (!cfg.drift.empty()) problem["drift"] = cfg.drift;
  if (cfg.data) problem["data"] = *cfg.data;

  const SolverConfig& sc = p.solver;
  json solver{{"damping", sc.damping},
              {"max_outer", sc.max_outer},
              {"tol_outer", sc.tol_outer},
              {"eps_schedule", sc.eps_schedule},
              {"fp",
               {{"tol", sc.fp.tol},
                {"max_iter", sc.fp.max_iter},
                {"pos_tol", sc.fp.pos_tol},
                {"damping", sc.fp.damping},
                {"anderson_depth", sc.fp.anderson_depth}}},
              {"hjb",
               {{"tol", sc.hjb.tol},
                {"grad_cap", sc.hjb.grad_cap},
                {"max_time", sc.hjb.max_time},
                {"dt_initial", sc.hjb.dt_initial},
                {"anderson_depth", sc.hjb.anderson_depth},
                {"refine_damping", sc.hjb.refine_damping},
                {"max_refine", sc.hjb.max_refine}}}};
  json root{{"problem", std::move(problem)},
            {"solver", std::move(solver)},
            {"output",
             {{"directory", cfg.output.directory},
              {"format", cfg.output.format},
              {"precision", cfg.output.precision}}},
            {"seed", cfg.seed}};
  return root.dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::string bytes = serialize_config(cfg);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace fmfg

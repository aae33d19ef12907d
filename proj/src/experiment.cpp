#include "tci/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "tci/concentration.hpp"
#include "tci/constants.hpp"
#include "tci/errors.hpp"
#include "tci/functional.hpp"
#include "tci/girsanov.hpp"
#include "tci/inequalities.hpp"
#include "tci/problem.hpp"
#include "tci/shift.hpp"
#include "tci/solver.hpp"

namespace tci {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

class SchemaReader {
 public:
  template <class T>
  void read(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string where = path + key;
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw std::invalid_argument("expected a finite number");
      } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
        out = v.get<int>();
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned()) throw std::invalid_argument("expected a nonnegative integer");
        out = v.get<std::uint64_t>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
        out = v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
        out = v.get<std::string>();
      } else if constexpr (std::is_same_v<T, std::optional<double>>) {
        if (v.is_null()) {
          out.reset();
          return;
        }
        if (!v.is_number()) throw std::invalid_argument("expected a number or null");
        out = v.get<double>();
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw std::invalid_argument("expected an array of numbers");
        std::vector<double> tmp;
        for (const auto& x : v) {
          if (!x.is_number()) throw std::invalid_argument("expected an array of numbers");
          tmp.push_back(x.get<double>());
        }
        out = std::move(tmp);
      } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
        if (!v.is_array()) throw std::invalid_argument("expected an array of strings");
        std::vector<std::string> tmp;
        for (const auto& x : v) {
          if (!x.is_string()) throw std::invalid_argument("expected an array of strings");
          tmp.push_back(x.get<std::string>());
        }
        out = std::move(tmp);
      }
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }

  /// Returns the sub-object at key (or an empty object), flagging non-objects.
  const json& section(const json& obj, const std::string& path, const char* key) {
    static const json kEmpty = json::object();
    if (!obj.contains(key)) return kEmpty;
    const json& v = obj.at(key);
    if (!v.is_object()) {
      fail(path + key, "expected an object");
      return kEmpty;
    }
    return v;
  }

  void allow(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) fail(path + it.key(), "unknown field");
    }
  }

  void require(bool ok, const std::string& where, const std::string& what) {
    if (!ok) fail(where, what);
  }

  void fail(const std::string& where, const std::string& what) { errors_.push_back(where + ": " + what); }

  void throw_if_errors() const {
    if (errors_.empty()) return;
    std::string msg = "invalid config (" + std::to_string(errors_.size()) + " field";
    msg += errors_.size() == 1 ? ")" : "s)";
    for (const auto& e : errors_) msg += "\n  " + e;
    throw SchemaError(msg);
  }

 private:
  std::vector<std::string> errors_;
};

const std::set<std::string> kConstantKeys = {"alpha", "theta", "K2", "K3", "K4", "beta", "K2_tilde",
                                             "K4_tilde", "eta", "C1", "f_tilde"};
const std::set<std::string> kFunctionals = {"l2_V_path_norm", "sup_H_norm", "terminal_H_norm", "linear_probe"};

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  SchemaReader r;
  ExperimentConfig c;
  if (!doc.is_object()) {
    r.fail("<root>", "expected a JSON object");
    r.throw_if_errors();
  }
  r.allow(doc, "", {"model", "noise", "solver", "initial", "shift", "functionals", "lambda_grid", "r_grid",
                    "replicates", "experiment_seed", "outputs", "t1", "constants", "moments", "audit",
                    "inequalities", "trajectories"});

  const json& model = r.section(doc, "", "model");
  r.allow(model, "model.", {"kind", "viscosity", "constants"});
  r.read(model, "model.", "kind", c.model.kind);
  r.require(one_of(c.model.kind, {"heat", "burgers", "ns2d"}), "model.kind", "expected heat, burgers or ns2d");
  r.read(model, "model.", "viscosity", c.model.viscosity);
  r.require(c.model.viscosity > 0.0, "model.viscosity", "must be positive");
  const json& consts = r.section(model, "model.", "constants");
  for (auto it = consts.begin(); it != consts.end(); ++it) {
    if (!kConstantKeys.count(it.key())) {
      r.fail("model.constants." + it.key(), "unknown constant");
    } else if (!it.value().is_number()) {
      r.fail("model.constants." + it.key(), "expected a number");
    } else {
      c.model.constants[it.key()] = it.value().get<double>();
    }
  }

  const json& noise = r.section(doc, "", "noise");
  r.allow(noise, "noise.", {"gains", "N_W", "C_B", "clamp"});
  r.read(noise, "noise.", "gains", c.noise.type);
  r.require(one_of(c.noise.type, {"k^-1", "single_mode"}), "noise.gains", "expected \"k^-1\" or \"single_mode\"");
  r.read(noise, "noise.", "N_W", c.noise.truncation);
  r.require(c.noise.truncation >= 1, "noise.N_W", "must be >= 1");
  r.read(noise, "noise.", "C_B", c.noise.C_B);
  r.require(c.noise.C_B >= 0.0, "noise.C_B", "must be nonnegative");
  if (noise.contains("clamp") && !noise.at("clamp").is_null()) {
    std::vector<double> clamp;
    r.read(noise, "noise.", "clamp", clamp);
    if (clamp.size() != 2 || !(clamp[0] > 0.0 && clamp[1] >= clamp[0])) {
      r.fail("noise.clamp", "expected [g_min, g_max] with 0 < g_min <= g_max, or null");
    } else {
      c.noise.g_min = clamp[0];
      c.noise.g_max = clamp[1];
    }
  }

  const json& solver = r.section(doc, "", "solver");
  r.allow(solver, "solver.", {"dt", "T", "n_modes", "cutoff", "dealias", "quadrature_points"});
  r.read(solver, "solver.", "dt", c.solver.dt);
  r.read(solver, "solver.", "T", c.solver.T);
  r.read(solver, "solver.", "n_modes", c.solver.n_modes);
  r.read(solver, "solver.", "cutoff", c.solver.cutoff);
  r.read(solver, "solver.", "dealias", c.solver.dealias);
  r.read(solver, "solver.", "quadrature_points", c.solver.quadrature_points);
  r.require(c.solver.dt > 0.0, "solver.dt", "must be positive");
  r.require(c.solver.T > 0.0, "solver.T", "must be positive");
  if (c.solver.dt > 0.0 && c.solver.T > 0.0) {
    const double ratio = c.solver.T / c.solver.dt;
    r.require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio, "solver.T", "must be a multiple of solver.dt");
  }
  r.require(c.solver.n_modes >= 1, "solver.n_modes", "must be >= 1");
  r.require(c.solver.cutoff >= 1, "solver.cutoff", "must be >= 1");
  r.require(c.solver.quadrature_points >= 0, "solver.quadrature_points", "must be >= 0");

  const json& initial = r.section(doc, "", "initial");
  r.allow(initial, "initial.", {"type", "mode", "amplitude"});
  r.read(initial, "initial.", "type", c.initial.type);
  r.require(one_of(c.initial.type, {"zero", "mode", "sine", "taylor_green", "random"}), "initial.type",
            "expected zero, mode, sine, taylor_green or random");
  r.read(initial, "initial.", "mode", c.initial.mode);
  r.read(initial, "initial.", "amplitude", c.initial.amplitude);
  r.require(c.initial.mode >= 1, "initial.mode", "must be >= 1");

  const json& shift_outer = r.section(doc, "", "shift");
  r.allow(shift_outer, "shift.", {"h"});
  const json& shift = r.section(shift_outer, "shift.", "h");
  r.allow(shift, "shift.h.", {"type", "mode_index", "amplitude"});
  r.read(shift, "shift.h.", "type", c.shift.type);
  r.require(one_of(c.shift.type, {"zero", "constant", "ramp", "mode"}), "shift.h.type",
            "expected zero, constant, ramp or mode");
  r.read(shift, "shift.h.", "mode_index", c.shift.mode_index);
  r.read(shift, "shift.h.", "amplitude", c.shift.amplitude);
  r.require(c.shift.mode_index >= 1 && c.shift.mode_index <= c.noise.truncation, "shift.h.mode_index",
            "must lie in [1, noise.N_W]");

  r.read(doc, "", "functionals", c.functionals);
  for (const auto& f : c.functionals) r.require(kFunctionals.count(f) > 0, "functionals", "unknown functional '" + f + "'");
  r.require(!c.functionals.empty(), "functionals", "must be nonempty");
  r.read(doc, "", "lambda_grid", c.lambda_grid);
  r.read(doc, "", "r_grid", c.r_grid);
  for (double x : c.r_grid) r.require(x >= 0.0, "r_grid", "radii must be nonnegative");
  r.read(doc, "", "replicates", c.replicates);
  r.require(c.replicates >= 2, "replicates", "must be >= 2");
  r.read(doc, "", "experiment_seed", c.experiment_seed);
  r.read(doc, "", "outputs", c.outputs);
  r.read(doc, "", "trajectories", c.trajectories);
  r.require(c.trajectories >= 0, "trajectories", "must be >= 0");

  const json& t1 = r.section(doc, "", "t1");
  r.allow(t1, "t1.", {"c", "lambda0", "lambda0_fraction"});
  r.read(t1, "t1.", "c", c.t1.c);
  r.read(t1, "t1.", "lambda0", c.t1.lambda0);
  r.read(t1, "t1.", "lambda0_fraction", c.t1.lambda0_fraction);
  r.require(c.t1.c > 0.0 && c.t1.c < 1.0, "t1.c", "must lie in (0, 1)");
  r.require(c.t1.lambda0_fraction > 0.0 && c.t1.lambda0_fraction < 1.0, "t1.lambda0_fraction",
            "must lie in (0, 1)");

  const json& cq = r.section(doc, "", "constants");
  r.allow(cq, "constants.", {"T", "K2", "C_B", "C1"});
  r.read(cq, "constants.", "T", c.constants.T);
  r.read(cq, "constants.", "K2", c.constants.K2);
  r.read(cq, "constants.", "C_B", c.constants.C_B);
  r.read(cq, "constants.", "C1", c.constants.C1);

  const json& moments = r.section(doc, "", "moments");
  r.allow(moments, "moments.", {"p"});
  r.read(moments, "moments.", "p", c.moment_p);
  r.require(c.moment_p > 0.0, "moments.p", "must be positive");
  const json& audit = r.section(doc, "", "audit");
  r.allow(audit, "audit.", {"samples"});
  r.read(audit, "audit.", "samples", c.audit_samples);
  r.require(c.audit_samples >= 1, "audit.samples", "must be >= 1");
  const json& ineq = r.section(doc, "", "inequalities");
  r.allow(ineq, "inequalities.", {"samples"});
  r.read(ineq, "inequalities.", "samples", c.inequality_samples);
  r.require(c.inequality_samples >= 1, "inequalities.samples", "must be >= 1");

  r.throw_if_errors();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json resolved_config(const ExperimentConfig& c) {
  auto optional = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json model_constants = json::object();
  for (const auto& [k, v] : c.model.constants) model_constants[k] = v;
  return json{
      {"model", {{"kind", c.model.kind}, {"viscosity", c.model.viscosity}, {"constants", model_constants}}},
      {"noise",
       {{"gains", c.noise.type},
        {"N_W", c.noise.truncation},
        {"C_B", c.noise.C_B},
        {"clamp", c.noise.g_min ? json::array({*c.noise.g_min, *c.noise.g_max}) : json(nullptr)}}},
      {"solver",
       {{"dt", c.solver.dt},
        {"T", c.solver.T},
        {"n_modes", c.solver.n_modes},
        {"cutoff", c.solver.cutoff},
        {"dealias", c.solver.dealias},
        {"quadrature_points", c.solver.quadrature_points}}},
      {"initial", {{"type", c.initial.type}, {"mode", c.initial.mode}, {"amplitude", c.initial.amplitude}}},
      {"shift",
       {{"h", {{"type", c.shift.type}, {"mode_index", c.shift.mode_index}, {"amplitude", c.shift.amplitude}}}}},
      {"functionals", c.functionals},
      {"lambda_grid", c.lambda_grid},
      {"r_grid", c.r_grid},
      {"replicates", c.replicates},
      {"experiment_seed", c.experiment_seed},
      {"outputs", c.outputs},
      {"trajectories", c.trajectories},
      {"t1", {{"c", c.t1.c}, {"lambda0", optional(c.t1.lambda0)}, {"lambda0_fraction", c.t1.lambda0_fraction}}},
      {"constants",
       {{"T", optional(c.constants.T)},
        {"K2", optional(c.constants.K2)},
        {"C_B", optional(c.constants.C_B)},
        {"C1", optional(c.constants.C1)}}},
      {"moments", {{"p", c.moment_p}}},
      {"audit", {{"samples", c.audit_samples}}},
      {"inequalities", {{"samples", c.inequality_samples}}},
  };
}

std::string config_hash(const json& resolved) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : resolved.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

namespace {

NoiseOperator build_noise(const NoiseConfig& n) {
  std::optional<GainClamp> clamp;
  if (n.g_min) clamp = GainClamp{*n.g_min, *n.g_max};
  return n.type == "single_mode" ? make_single_mode_noise(n.truncation, n.C_B, clamp)
                                 : make_inverse_k_noise(n.truncation, n.C_B, clamp);
}

ModelSpec build_spec(const ExperimentConfig& c) {
  const NoiseOperator noise = build_noise(c.noise);
  const ModelKind kind = model_kind_from_string(c.model.kind);
  ModelSpec spec = kind == ModelKind::kHeat      ? make_heat(noise, c.solver.T)
                   : kind == ModelKind::kBurgers ? make_burgers(noise, c.solver.T)
                                                 : make_navier_stokes(noise, c.model.viscosity, c.solver.T);
  AssumptionConstants& k = spec.constants;
  for (const auto& [name, v] : c.model.constants) {
    if (name == "alpha") k.alpha = v;
    else if (name == "theta") k.theta = v;
    else if (name == "K2") k.K2 = v;
    else if (name == "K3") k.K3 = v;
    else if (name == "K4") k.K4 = v;
    else if (name == "beta") k.beta = v;
    else if (name == "K2_tilde") k.K2_tilde = v;
    else if (name == "K4_tilde") k.K4_tilde = v;
    else if (name == "eta") k.eta = v;
    else if (name == "C1") k.C1 = v;
    else if (name == "f_tilde") k.f_schedule = [v](double) { return v; };
  }
  return spec;
}

Resolution build_resolution(const SolverSection& s) {
  return Resolution{s.n_modes, s.cutoff, s.dealias, s.quadrature_points};
}

SolverConfig build_solver(const SolverSection& s) {
  SolverConfig cfg;
  cfg.dt = s.dt;
  cfg.T = s.T;
  cfg.resolution = build_resolution(s);
  cfg.store_stride = 0;
  return cfg;
}

Eigen::VectorXd build_initial(const Model& model, const ExperimentConfig& c) {
  const InitialConfig& init = c.initial;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model.dim());
  if (init.type == "zero") return x0;
  if (init.type == "mode") {
    if (init.mode > model.dim()) throw SchemaError("initial.mode: exceeds the state dimension");
    x0[init.mode - 1] = init.amplitude;
    return x0;
  }
  if (init.type == "sine") {
    if (model.spec().is_2d()) throw SchemaError("initial.type: sine needs a 1-D model");
    if (init.mode > model.dim()) throw SchemaError("initial.mode: exceeds the state dimension");
    return model.to_modal(Field1D::sine(model.dim(), init.mode, init.amplitude));
  }
  if (init.type == "taylor_green") {
    if (!model.spec().is_2d()) throw SchemaError("initial.type: taylor_green needs the ns2d model");
    return model.to_modal(taylor_green(model.resolution().cutoff, init.amplitude));
  }
  return init.amplitude * random_state(model, {c.experiment_seed, 0, 0});
}

ShiftFunction build_shift(const ExperimentConfig& c, int steps) {
  const ShiftConfig& s = c.shift;
  const int nw = c.noise.truncation;
  const double dt = c.solver.dt;
  if (s.type == "constant") return ShiftFunction::constant(nw, s.amplitude, dt, steps);
  if (s.type == "ramp") return ShiftFunction::ramp(nw, s.mode_index, s.amplitude, dt, steps);
  if (s.type == "mode") return ShiftFunction::mode(nw, s.mode_index, s.amplitude, dt, steps);
  return ShiftFunction::zero(nw, dt, steps);
}

std::vector<FunctionalSpec> build_functionals(const std::vector<std::string>& names, int dim) {
  std::vector<FunctionalSpec> out;
  for (const auto& n : names) out.push_back(functional_from_name(n, dim));
  return out;
}

std::string trajectory_csv(const std::vector<const Trajectory*>& paths, const std::vector<std::string>& labels) {
  std::ostringstream os;
  os << std::setprecision(17) << "time";
  for (const auto& l : labels) os << ",h_norm" << l << ",v_norm" << l;
  os << '\n';
  for (std::size_t k = 0; k < paths.front()->times.size(); ++k) {
    os << paths.front()->times[k];
    for (const Trajectory* p : paths) os << ',' << p->h_norms[k] << ',' << p->v_norms[k];
    os << '\n';
  }
  return os.str();
}

void csv_row(std::ostringstream& os, std::uint32_t replicate, std::uint64_t seed, const std::string& functional,
             double value) {
  os << replicate << ',' << seed << ',' << functional << ',' << value << '\n';
}

std::ostringstream csv_header() {
  std::ostringstream os;
  os << std::setprecision(17) << "replicate,seed,functional,value\n";
  return os;
}

void report_divergences(const std::vector<std::uint32_t>& diverged, const std::string& label,
                        std::uint64_t seed, std::vector<std::string>& failures) {
  for (std::uint32_t r : diverged) {
    failures.push_back(label + ": divergence at replicate " + std::to_string(r) + " (experiment_seed " +
                       std::to_string(seed) + ")");
  }
}

struct Context {
  ModelSpec spec;
  Model model;
  SolverConfig solver;
  Eigen::VectorXd x0;

  explicit Context(const ExperimentConfig& c)
      : spec(build_spec(c)), model(spec, build_resolution(c.solver)), solver(build_solver(c.solver)),
        x0(build_initial(model, c)) {}
};

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void run_audit(const ExperimentConfig& c, RunOutput& out) {
  Context ctx(c);
  const AuditReport audit = audit_hypotheses(ctx.model, c.audit_samples, c.experiment_seed);
  const FeasibilityReport feas = t1_feasibility(ctx.model.spec().constants);
  const InequalityReport ineq =
      inequality_suite(c.audit_samples, c.experiment_seed, c.solver.n_modes, c.solver.cutoff);
  out.report["results"] = {{"hypotheses", audit}, {"feasibility", feas}, {"inequalities", ineq}};
  for (const auto& h : audit.results) {
    if (!h.pass) out.failures.push_back("audit/" + h.name);
  }
  for (const auto& s : ineq.suites) {
    if (!s.pass()) out.failures.push_back("inequalities/" + s.name);
  }
}

void run_constants(const ExperimentConfig& c, RunOutput& out) {
  Context ctx(c);
  const AssumptionConstants& k = ctx.model.spec().constants;
  json warnings = json::array();
  T2ConstantQuery q = t2_query(ctx.model, c.solver.T);
  if (c.constants.T) q.T = *c.constants.T;
  if (c.constants.K2) q.K2 = *c.constants.K2;
  if (c.constants.C_B) q.C_B = *c.constants.C_B;
  if (c.constants.C1) q.C1 = *c.constants.C1;
  const T2Constant t2 = t2_constant(q);
  if (t2.clamped) {
    warnings.push_back("K2 = " + std::to_string(q.K2) + " < 0 replaced by 0 in the T2 constant");
  }
  json results = {{"C_T2", t2.value},
                  {"argmin", {t2.eps1, t2.eps2}},
                  {"query", {{"T", q.T}, {"K2", q.K2}, {"C_B", q.C_B}, {"C1", q.C1}}}};
  try {
    const AdmissibleRanges ranges = admissible_ranges(k.theta, k.eta, k.K3, k.C_B, c.t1.c);
    const double lambda0 = c.t1.lambda0.value_or(c.t1.lambda0_fraction * ranges.lambda0_max_lemma);
    const double f_int = f_tilde_integral(ctx.model, c.solver.T);
    const double x0_sq = ctx.x0.squaredNorm();
    T1ConstantQuery t1{lambda0, c.t1.c, k.theta, f_int, std::exp(lambda0 * x0_sq), ranges.c_max,
                       ranges.lambda0_max_lemma};
    const GaussianMomentPair ab = gaussian_moment_pair(c.t1.c, lambda0, k.theta, f_int, x0_sq);
    results["ranges"] = ranges;
    results["lambda0"] = lambda0;
    results["c"] = c.t1.c;
    results["f_tilde_integral"] = f_int;
    results["C_T1"] = t1_constant(t1);
    results["gaussian_moment"] = {{"a", ab.a}, {"b", ab.b}};
    results["D"] = ccr_constant(ab.a, ab.b);
  } catch (const std::exception& e) {
    warnings.push_back(std::string("T1 constants unavailable: ") + e.what());
    out.failures.push_back("constants/t1: " + std::string(e.what()));
  }
  results["warnings"] = warnings;
  out.report["results"] = results;
}

void run_simulate(const ExperimentConfig& c, RunOutput& out) {
  Context ctx(c);
  const std::vector<FunctionalSpec> fs = build_functionals(c.functionals, ctx.model.dim());
  const PathEnsemble coarse = run_path_ensemble(ctx.model, ctx.solver, ctx.x0, fs, c.replicates, c.experiment_seed);
  SolverConfig fine_cfg = ctx.solver;
  fine_cfg.dt = ctx.solver.dt / 2.0;
  const PathEnsemble fine = run_path_ensemble(ctx.model, fine_cfg, ctx.x0, {}, c.replicates, c.experiment_seed);
  const MomentReport moments =
      moment_report(moment_level(coarse, c.moment_p, ctx.solver.dt), moment_level(fine, c.moment_p, fine_cfg.dt),
                    c.moment_p);

  json functionals = json::object();
  auto csv = csv_header();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Ensemble e = coarse.ensemble(i);
    functionals[fs[i].name()] = mean_estimate(e.values);
    for (std::size_t j = 0; j < e.values.size(); ++j) {
      csv_row(csv, e.seeds[j].replicate, c.experiment_seed, fs[i].name(), e.values[j]);
    }
  }
  out.ensemble_csv = csv.str();
  out.report["results"] = {{"moments", moments}, {"functionals", functionals}};
  report_divergences(coarse.diverged(), "simulate", c.experiment_seed, out.failures);
  report_divergences(fine.diverged(), "simulate[dt/2]", c.experiment_seed, out.failures);
  if (!moments.finite) out.failures.push_back("simulate/moments_finite");
  if (!moments.stable) out.failures.push_back("simulate/moments_stable");

  for (int r = 0; r < std::min(c.trajectories, c.replicates); ++r) {
    const Trajectory path =
        solve(ctx.model, ctx.solver, ctx.x0, {c.experiment_seed, static_cast<std::uint32_t>(r), 0});
    out.trajectories.emplace_back("trajectory_" + std::to_string(r) + ".csv", trajectory_csv({&path}, {""}));
  }
}

void run_verify_t2(const ExperimentConfig& c, RunOutput& out) {
  Context ctx(c);
  const ShiftFunction h = build_shift(c, ctx.solver.steps());
  const std::vector<FunctionalSpec> fs = build_functionals(c.functionals, ctx.model.dim());
  const CoupledEnsemble ens = run_coupled_ensemble(ctx.model, ctx.solver, ctx.x0, h, fs, c.replicates,
                                                   c.experiment_seed);
  const T2Constant constant = t2_constant(t2_query(ctx.model, c.solver.T));
  const ContractionReport contraction = contraction_report(ens, h, constant);
  json chains = json::array();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const T2ChainReport chain = t2_chain_check(ens, i, h, constant);
    chains.push_back(chain);
    if (!chain.pass) out.failures.push_back("verify-t2/t2_chain[" + chain.functional + "]");
  }

  // Girsanov normalisation: E^Q log(dQ/dP) = H and E^P[M_T] = 1.
  const MeanEstimate log_rn = mean_estimate(ens.log_rns());
  std::vector<double> weights = ens.log_rn_references();
  for (double& w : weights) w = std::exp(w);
  const MeanEstimate martingale = mean_estimate(weights);
  const double entropy = shift_entropy(h);
  const bool entropy_ok = std::abs(log_rn.mean - entropy) <= 3.0 * log_rn.std_error;
  const bool martingale_ok = std::abs(martingale.mean - 1.0) <= 3.0 * martingale.std_error;

  out.report["results"] = {
      {"contraction", contraction},
      {"t2_chain", chains},
      {"girsanov",
       {{"entropy", entropy},
        {"log_rn", log_rn},
        {"entropy_identity_pass", entropy_ok},
        {"exp_log_rn_reference", martingale},
        {"martingale_pass", martingale_ok}}}};
  if (!contraction.pass) out.failures.push_back("verify-t2/contraction");
  if (!entropy_ok) out.failures.push_back("verify-t2/entropy_identity");
  if (!martingale_ok) out.failures.push_back("verify-t2/martingale");
  report_divergences(ens.diverged(), "verify-t2", c.experiment_seed, out.failures);

  auto csv = csv_header();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (const auto& s : ens.samples) {
      if (s.diverged) continue;
      csv_row(csv, s.replicate, c.experiment_seed, fs[i].name() + "@shifted", s.fx[i]);
      csv_row(csv, s.replicate, c.experiment_seed, fs[i].name() + "@unshifted", s.fy[i]);
    }
  }
  out.ensemble_csv = csv.str();
  for (int r = 0; r < std::min(c.trajectories, c.replicates); ++r) {
    const CoupledPair pair =
        coupled_solve(ctx.model, ctx.solver, ctx.x0, h, {c.experiment_seed, static_cast<std::uint32_t>(r), 0});
    out.trajectories.emplace_back("trajectory_" + std::to_string(r) + ".csv",
                                  trajectory_csv({&pair.x_traj, &pair.y_traj}, {"_shifted", "_unshifted"}));
  }
}

void run_verify_t1(const ExperimentConfig& c, RunOutput& out) {
  Context ctx(c);
  const AssumptionConstants& k = ctx.model.spec().constants;
  const AdmissibleRanges ranges = admissible_ranges(k.theta, k.eta, k.K3, k.C_B, c.t1.c);
  const double lambda0 = c.t1.lambda0.value_or(c.t1.lambda0_fraction * ranges.lambda0_max_lemma);
  const double f_int = f_tilde_integral(ctx.model, c.solver.T);
  const double mu_moment = std::exp(lambda0 * ctx.x0.squaredNorm());
  const double C = t1_constant({lambda0, c.t1.c, k.theta, f_int, mu_moment, ranges.c_max, ranges.lambda0_max_lemma});

  // The T1 inequality lives on L2([0,T]; V), witnessed by its 1-Lipschitz norm.
  const std::vector<FunctionalSpec> fs{FunctionalSpec::l2_v_path_norm()};
  const PathEnsemble ens = run_path_ensemble(ctx.model, ctx.solver, ctx.x0, fs, c.replicates, c.experiment_seed);
  const ExpEstimateReport estimate = exp_moment_check(ctx.model, ctx.solver, ctx.x0, c.t1.c, lambda0, ens);
  const Ensemble values = ens.ensemble(0);
  const BobkovGotzeReport bg = bobkov_gotze_check(values, C, c.lambda_grid);
  const TailReport tails = gaussian_tail_check(values, C, c.r_grid);

  out.report["results"] = {{"ranges", ranges},
                           {"lambda0", lambda0},
                           {"c", c.t1.c},
                           {"C_T1", C},
                           {"exp_estimate", estimate},
                           {"bobkov_gotze", bg},
                           {"gaussian_tail", tails}};
  if (!estimate.pass) out.failures.push_back("verify-t1/exp_estimate");
  for (const auto& row : bg.rows) {
    if (!row.conservative_pass) {
      out.failures.push_back("verify-t1/bobkov_gotze[lambda=" + std::to_string(row.lambda) + "]");
    }
  }
  for (const auto& row : tails.rows) {
    if (row.violation) out.failures.push_back("verify-t1/gaussian_tail[r=" + std::to_string(row.r) + "]");
  }
  report_divergences(ens.diverged(), "verify-t1", c.experiment_seed, out.failures);

  auto csv = csv_header();
  for (std::size_t j = 0; j < values.values.size(); ++j) {
    csv_row(csv, values.seeds[j].replicate, c.experiment_seed, fs[0].name(), values.values[j]);
  }
  out.ensemble_csv = csv.str();
  for (int r = 0; r < std::min(c.trajectories, c.replicates); ++r) {
    const Trajectory path =
        solve(ctx.model, ctx.solver, ctx.x0, {c.experiment_seed, static_cast<std::uint32_t>(r), 0});
    out.trajectories.emplace_back("trajectory_" + std::to_string(r) + ".csv", trajectory_csv({&path}, {""}));
  }
}

void run_inequalities(const ExperimentConfig& c, RunOutput& out) {
  const InequalityReport ineq =
      inequality_suite(c.inequality_samples, c.experiment_seed, c.solver.n_modes, c.solver.cutoff);
  out.report["results"] = ineq;
  for (const auto& s : ineq.suites) {
    if (!s.pass()) out.failures.push_back("inequalities/" + s.name);
  }
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"audit", "constants", "simulate", "verify-t2", "verify-t1",
                                              "inequalities"};
  return names;
}

RunOutput run_experiment(const std::string& subcommand, const ExperimentConfig& cfg) {
  RunOutput out;
  const json resolved = resolved_config(cfg);
  if (subcommand == "audit") run_audit(cfg, out);
  else if (subcommand == "constants") run_constants(cfg, out);
  else if (subcommand == "simulate") run_simulate(cfg, out);
  else if (subcommand == "verify-t2") run_verify_t2(cfg, out);
  else if (subcommand == "verify-t1") run_verify_t1(cfg, out);
  else if (subcommand == "inequalities") run_inequalities(cfg, out);
  else throw SchemaError("unknown subcommand '" + subcommand + "'");
  out.report["subcommand"] = subcommand;
  out.report["config"] = resolved;
  out.report["config_hash"] = config_hash(resolved);
  out.report["failures"] = out.failures;
  out.report["pass"] = out.failures.empty();
  return out;
}

std::string report_text(const json& report) { return report.dump(2) + "\n"; }

void write_outputs(const RunOutput& out, const std::string& dir, const std::string& timestamp) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json report = out.report;
  report["timestamp"] = timestamp;
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    f << body;
  };
  write("report.json", report_text(report));
  if (!out.ensemble_csv.empty()) write("ensemble.csv", out.ensemble_csv);
  for (const auto& [name, body] : out.trajectories) write(name, body);
}

}  // namespace tci

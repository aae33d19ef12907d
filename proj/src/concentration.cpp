#include "tci/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tci/constants.hpp"
#include "tci/errors.hpp"
#include "tci/parallel.hpp"

namespace tci {

namespace {

constexpr double kSigmas = 3.0;
constexpr double kMaxExponent = 700.0;

double compensated_mean(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value() / static_cast<double>(values.size());
}

// (1/M) sum exp(x_i) with max-subtraction; se from the sample variance.
ExpMoment mean_of_exp(std::span<const double> x) {
  ExpMoment out;
  const double m = *std::max_element(x.begin(), x.end());
  if (m > kMaxExponent) {
    out.infinite = true;
    out.estimate = std::numeric_limits<double>::infinity();
    out.std_error = std::numeric_limits<double>::infinity();
    return out;
  }
  std::vector<double> scaled(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = std::exp(x[i] - m);
  const MeanEstimate e = mean_estimate(scaled);
  const double factor = std::exp(m);
  out.estimate = factor * e.mean;
  out.std_error = factor * e.std_error;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::uint32_t> PathEnsemble::diverged() const {
  std::vector<std::uint32_t> out;
  for (const auto& s : samples) {
    if (s.diverged) out.push_back(s.replicate);
  }
  return out;
}

std::vector<double> PathEnsemble::v_energies() const {
  std::vector<double> out;
  for (const auto& s : samples) {
    if (!s.diverged) out.push_back(s.v_energy);
  }
  return out;
}

std::vector<double> PathEnsemble::sup_h_norms() const {
  std::vector<double> out;
  for (const auto& s : samples) {
    if (!s.diverged) out.push_back(s.sup_h);
  }
  return out;
}

Ensemble PathEnsemble::ensemble(std::size_t i) const {
  Ensemble e;
  e.functional = functionals.at(i);
  for (const auto& s : samples) {
    if (s.diverged) continue;
    e.values.push_back(s.f.at(i));
    e.seeds.push_back({experiment_seed, s.replicate, 0});
  }
  return e;
}

PathEnsemble run_path_ensemble(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                               const std::vector<FunctionalSpec>& functionals, int replicates,
                               std::uint64_t experiment_seed) {
  if (replicates < 2) throw ParameterError("replicates must be >= 2");
  SolverConfig run_cfg = cfg;
  run_cfg.store_stride = 0;
  PathEnsemble ens;
  ens.experiment_seed = experiment_seed;
  ens.functionals = functionals;
  ens.samples.resize(static_cast<std::size_t>(replicates));
  parallel_for(replicates, [&](int r) {
    PathSample& out = ens.samples[static_cast<std::size_t>(r)];
    out.replicate = static_cast<std::uint32_t>(r);
    try {
      const Trajectory path = solve(model, run_cfg, x0, {experiment_seed, out.replicate, 0});
      out.v_energy = path.total_v_energy();
      out.sup_h = path.max_h_norm();
      for (const auto& f : functionals) out.f.push_back(f(path));
    } catch (const DivergenceError& e) {
      out.diverged = true;
      out.divergence_step = static_cast<long>(e.step());
    }
  });
  return ens;
}

// ---------------------------------------------------------------------------

ExpMoment exp_moment_empirical(std::span<const double> values, double lambda) {
  const std::size_t n = values.size();
  if (n < 2) throw ParameterError("exp_moment_empirical needs at least 2 values");
  ExpMoment out;
  const double mean = compensated_mean(values);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = lambda * (values[i] - mean);
  const double m = *std::max_element(d.begin(), d.end());
  if (!(m <= kMaxExponent)) {
    out.infinite = true;
    out.estimate = std::numeric_limits<double>::infinity();
    out.std_error = std::numeric_limits<double>::infinity();
    return out;
  }
  std::vector<double> w(n);
  CompensatedSum total;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(d[i] - m);
    total.add(w[i]);
  }
  const double s = total.value();
  const double nn = static_cast<double>(n);
  const double scale = std::exp(m);
  out.estimate = scale * (s / nn);

  // Leave-one-out: removing v_i shifts the mean by -(v_i - mean)/(n-1), which
  // rescales every remaining term by exp(d_i / (n-1)).
  std::vector<double> loo(n);
  CompensatedSum loo_sum;
  for (std::size_t i = 0; i < n; ++i) {
    loo[i] = std::exp(d[i] / (nn - 1.0)) * (s - w[i]) / (nn - 1.0);
    loo_sum.add(loo[i]);
  }
  const double loo_mean = loo_sum.value() / nn;
  CompensatedSum sq;
  for (double x : loo) sq.add((x - loo_mean) * (x - loo_mean));
  out.std_error = scale * std::sqrt((nn - 1.0) / nn * sq.value());
  return out;
}

ExpMoment exp_moment_empirical(const Ensemble& e, double lambda) { return exp_moment_empirical(e.values, lambda); }

bool BobkovGotzeReport::no_violation() const {
  return std::none_of(rows.begin(), rows.end(), [](const LambdaVerdict& v) { return v.violation; });
}

bool BobkovGotzeReport::all_conservative() const {
  return std::all_of(rows.begin(), rows.end(), [](const LambdaVerdict& v) { return v.conservative_pass; });
}

BobkovGotzeReport bobkov_gotze_check(const Ensemble& e, double C, std::span<const double> lambda_grid) {
  if (!(C > 0.0)) throw ParameterError("C must be positive");
  BobkovGotzeReport r;
  r.C = C;
  r.lipschitz = e.functional.lipschitz_constant();
  for (double lambda : lambda_grid) {
    LambdaVerdict v;
    v.lambda = lambda;
    v.moment = exp_moment_empirical(e, lambda);
    v.bound = std::exp(C * lambda * lambda * r.lipschitz * r.lipschitz / 2.0);
    v.margin = v.bound - v.moment.estimate;
    v.conservative_pass = !v.moment.infinite && v.moment.estimate + kSigmas * v.moment.std_error <= v.bound;
    v.violation = v.moment.infinite || v.moment.estimate - kSigmas * v.moment.std_error > v.bound;
    r.rows.push_back(v);
  }
  return r;
}

double f_tilde_integral(const Model& model, double T) {
  AssumptionConstants c = model.spec().constants;
  c.horizon_T = T;
  return c.f_tilde_integral();
}

ExpEstimateReport exp_moment_check(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                                   double c, double lambda0, const PathEnsemble& ensemble) {
  const AssumptionConstants& k = model.spec().constants;
  const AdmissibleRanges ranges = admissible_ranges(k.theta, k.eta, k.K3, k.C_B, c);
  if (!(lambda0 > 0.0 && lambda0 < ranges.lambda0_max_lemma)) {
    throw ParameterError("lambda0 = " + std::to_string(lambda0) + " outside (0, " +
                         std::to_string(ranges.lambda0_max_lemma) + ")");
  }
  ExpEstimateReport r;
  r.c = c;
  r.lambda0 = lambda0;
  r.exponent_scale = c * lambda0 * k.theta;
  std::vector<double> exponents = ensemble.v_energies();
  for (double& x : exponents) x *= r.exponent_scale;
  r.diverged = ensemble.diverged();
  if (exponents.size() < 2) throw ParameterError("exp_moment_check needs at least 2 finite replicates");
  const ExpMoment m = mean_of_exp(exponents);
  r.estimate = m.estimate;
  r.std_error = m.std_error;
  r.infinite = m.infinite;
  r.rhs = std::exp(lambda0 * f_tilde_integral(model, cfg.T)) * std::exp(lambda0 * x0.squaredNorm());
  r.margin = r.rhs - (r.estimate + kSigmas * r.std_error);
  r.pass = !r.infinite && r.diverged.empty() && r.margin >= 0.0;
  return r;
}

ExpEstimateReport exp_moment_check(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                                   double c, double lambda0, int replicates, std::uint64_t experiment_seed) {
  const PathEnsemble ens = run_path_ensemble(model, cfg, x0, {}, replicates, experiment_seed);
  return exp_moment_check(model, cfg, x0, c, lambda0, ens);
}

// ---------------------------------------------------------------------------

bool TailReport::no_violation() const {
  return std::none_of(rows.begin(), rows.end(), [](const TailVerdict& v) { return v.violation; });
}

TailReport gaussian_tail_check(const Ensemble& e, double C, std::span<const double> r_grid) {
  if (!(C > 0.0)) throw ParameterError("C must be positive");
  if (e.values.size() < 2) throw ParameterError("gaussian_tail_check needs at least 2 values");
  TailReport rep;
  rep.C = C;
  rep.lipschitz = e.functional.lipschitz_constant();
  const double mean = compensated_mean(e.values);
  const double n = static_cast<double>(e.values.size());
  const double z2 = kSigmas * kSigmas;
  for (double r : r_grid) {
    if (!(r >= 0.0)) throw ParameterError("tail radii must be nonnegative");
    TailVerdict v;
    v.r = r;
    const auto hits = std::count_if(e.values.begin(), e.values.end(), [&](double x) { return x - mean >= r; });
    const double p = static_cast<double>(hits) / n;
    v.empirical = p;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = kSigmas / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    v.wilson_low = std::max(0.0, center - half);
    v.wilson_high = std::min(1.0, center + half);
    v.bound = std::exp(-r * r / (2.0 * C * rep.lipschitz * rep.lipschitz));
    v.conservative_pass = v.wilson_high <= v.bound;
    v.violation = v.wilson_low > v.bound;
    rep.rows.push_back(v);
  }
  return rep;
}

// ---------------------------------------------------------------------------

T2ChainReport t2_chain_check(const CoupledEnsemble& ensemble, std::size_t functional, const ShiftFunction& h,
                             const T2Constant& constant) {
  T2ChainReport r;
  const FunctionalSpec& f = ensemble.functionals.at(functional);
  r.functional = f.name();
  r.lipschitz = f.lipschitz_constant();
  r.entropy = shift_entropy(h);
  r.constant = constant;
  r.diverged = ensemble.diverged();
  const std::vector<double> x = ensemble.shifted_values(functional);
  const std::vector<double> y = ensemble.unshifted_values(functional);
  r.w2 = w2_sorted_1d(x, y);
  const MeanEstimate ex = mean_estimate(x);
  const MeanEstimate ey = mean_estimate(y);
  r.combined_se = std::sqrt(ex.std_error * ex.std_error + ey.std_error * ey.std_error);
  r.bound = r.lipschitz * std::sqrt(2.0 * constant.value * r.entropy);
  r.margin = r.bound - r.w2;
  r.margin_in_se = r.combined_se > 0.0 ? r.margin / r.combined_se
                                       : (r.margin >= 0.0 ? std::numeric_limits<double>::infinity()
                                                          : -std::numeric_limits<double>::infinity());
  r.pass = r.diverged.empty() && r.w2 <= r.bound + kSigmas * r.combined_se;
  return r;
}

T2ChainReport t2_chain_check(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                             const ShiftFunction& h, const FunctionalSpec& functional, int replicates,
                             std::uint64_t experiment_seed) {
  const CoupledEnsemble ens = run_coupled_ensemble(model, cfg, x0, h, {functional}, replicates, experiment_seed);
  return t2_chain_check(ens, 0, h, t2_constant(t2_query(model, cfg.T)));
}

// ---------------------------------------------------------------------------

MomentLevel moment_level(const PathEnsemble& ensemble, double p, double dt) {
  MomentLevel m;
  m.dt = dt;
  std::vector<double> sup = ensemble.sup_h_norms();
  for (double& s : sup) s = std::pow(s, p);
  m.sup_h_pow = mean_estimate(sup);
  m.v_energy = mean_estimate(ensemble.v_energies());
  m.diverged = ensemble.diverged();
  return m;
}

MomentReport moment_report(const MomentLevel& coarse, const MomentLevel& fine, double p) {
  MomentReport r;
  r.p = p;
  r.coarse = coarse;
  r.fine = fine;
  auto finite = [](const MomentLevel& m) {
    return m.diverged.empty() && m.sup_h_pow.n > 0 && std::isfinite(m.sup_h_pow.mean) &&
           std::isfinite(m.v_energy.mean);
  };
  auto within_two = [](double a, double b) {
    if (a == 0.0 && b == 0.0) return true;
    if (!(a > 0.0 && b > 0.0)) return false;
    return std::max(a, b) <= 2.0 * std::min(a, b);
  };
  r.finite = finite(coarse) && finite(fine);
  r.stable = r.finite && within_two(coarse.sup_h_pow.mean, fine.sup_h_pow.mean) &&
             within_two(coarse.v_energy.mean, fine.v_energy.mean);
  return r;
}

MomentReport moment_report(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0, double p,
                           int replicates, std::uint64_t experiment_seed) {
  if (!(p > 0.0)) throw ParameterError("moment order p must be positive");
  SolverConfig fine_cfg = cfg;
  fine_cfg.dt = cfg.dt / 2.0;
  const PathEnsemble coarse = run_path_ensemble(model, cfg, x0, {}, replicates, experiment_seed);
  const PathEnsemble fine = run_path_ensemble(model, fine_cfg, x0, {}, replicates, experiment_seed);
  return moment_report(moment_level(coarse, p, cfg.dt), moment_level(fine, p, fine_cfg.dt), p);
}

// ---------------------------------------------------------------------------

std::vector<double> gaussian_samples(std::size_t n, double sigma, std::uint64_t experiment_seed) {
  CounterStream stream({experiment_seed, 0, 0}, StreamTag::kSynthetic);
  std::vector<double> out(n);
  for (double& x : out) x = sigma * stream.normal();
  return out;
}

std::vector<double> student_t_samples(std::size_t n, int df, std::uint64_t experiment_seed) {
  if (df < 1) throw ParameterError("degrees of freedom must be >= 1");
  CounterStream stream({experiment_seed, 1, 0}, StreamTag::kSynthetic);
  std::vector<double> out(n);
  for (double& x : out) {
    const double z = stream.normal();
    double chi2 = 0.0;
    for (int k = 0; k < df; ++k) {
      const double g = stream.normal();
      chi2 += g * g;
    }
    x = z / std::sqrt(chi2 / df);
  }
  return out;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const ExpMoment& m) {
  j = nlohmann::json{{"estimate", m.estimate}, {"std_error", m.std_error}, {"infinite", m.infinite}};
}

void to_json(nlohmann::json& j, const LambdaVerdict& v) {
  j = nlohmann::json{{"lambda", v.lambda},
                     {"moment", v.moment},
                     {"bound", v.bound},
                     {"margin", v.margin},
                     {"conservative_pass", v.conservative_pass},
                     {"violation", v.violation}};
}

void to_json(nlohmann::json& j, const BobkovGotzeReport& r) {
  j = nlohmann::json{{"C", r.C}, {"lipschitz", r.lipschitz}, {"rows", r.rows}, {"no_violation", r.no_violation()}};
}

void to_json(nlohmann::json& j, const ExpEstimateReport& r) {
  j = nlohmann::json{{"c", r.c},
                     {"lambda0", r.lambda0},
                     {"exponent_scale", r.exponent_scale},
                     {"estimate", r.estimate},
                     {"std_error", r.std_error},
                     {"infinite", r.infinite},
                     {"rhs", r.rhs},
                     {"margin", r.margin},
                     {"diverged_replicates", r.diverged},
                     {"pass", r.pass}};
}

void to_json(nlohmann::json& j, const TailVerdict& v) {
  j = nlohmann::json{{"r", v.r},
                     {"empirical", v.empirical},
                     {"wilson", {v.wilson_low, v.wilson_high}},
                     {"bound", v.bound},
                     {"conservative_pass", v.conservative_pass},
                     {"violation", v.violation}};
}

void to_json(nlohmann::json& j, const TailReport& r) {
  j = nlohmann::json{{"C", r.C}, {"lipschitz", r.lipschitz}, {"rows", r.rows}, {"no_violation", r.no_violation()}};
}

void to_json(nlohmann::json& j, const T2ChainReport& r) {
  j = nlohmann::json{{"functional", r.functional},
                     {"lipschitz", r.lipschitz},
                     {"entropy", r.entropy},
                     {"w2", r.w2},
                     {"combined_se", r.combined_se},
                     {"C_T2", r.constant},
                     {"bound", r.bound},
                     {"margin", r.margin},
                     {"diverged_replicates", r.diverged},
                     {"pass", r.pass}};
  // JSON has no infinity; the ratio is omitted when the stderr vanishes.
  if (std::isfinite(r.margin_in_se)) j["margin_in_se"] = r.margin_in_se;
}

void to_json(nlohmann::json& j, const MomentLevel& m) {
  j = nlohmann::json{{"dt", m.dt}, {"sup_h_pow", m.sup_h_pow}, {"v_energy", m.v_energy},
                     {"diverged_replicates", m.diverged}};
}

void to_json(nlohmann::json& j, const MomentReport& r) {
  j = nlohmann::json{{"p", r.p}, {"coarse", r.coarse}, {"fine", r.fine}, {"finite", r.finite}, {"stable", r.stable}};
}

}  // namespace tci

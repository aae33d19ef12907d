#include "tci/girsanov.hpp"

#include <algorithm>

#include "tci/errors.hpp"
#include "tci/parallel.hpp"

namespace tci {

CoupledPair coupled_solve(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                          const ShiftFunction& h, const SeedSpec& seed) {
  const int steps = cfg.steps();
  const NoiseOperator& noise = model.spec().noise;
  if (h.steps() != steps || h.truncation() != noise.truncation()) {
    throw ParameterError("shift does not match the step grid or noise truncation");
  }
  TrajectoryRecorder rx(model, cfg, x0);
  TrajectoryRecorder ry(model, cfg, x0);
  Eigen::VectorXd x = x0;
  Eigen::VectorXd y = x0;
  double sup_gap_sq = 0.0;
  CompensatedSum stochastic;
  for (int k = 0; k < steps; ++k) {
    const SeedSpec s{seed.experiment_seed, seed.replicate, static_cast<std::uint32_t>(k)};
    const Eigen::VectorXd dW = sample_increment(noise, cfg.dt, s);
    const Eigen::VectorXd& hk = h.at_step(k);
    const double t = k * cfg.dt;
    x = step(model, cfg, x, t, dW, &hk, static_cast<std::size_t>(k));
    y = step(model, cfg, y, t, dW, nullptr, static_cast<std::size_t>(k));
    rx.record(k + 1, x);
    ry.record(k + 1, y);
    sup_gap_sq = std::max(sup_gap_sq, (x - y).squaredNorm());
    stochastic.add(hk.dot(dW));
  }
  CoupledPair pair;
  pair.x_traj = rx.finish(std::move(x));
  pair.y_traj = ry.finish(std::move(y));
  pair.sup_gap_sq = sup_gap_sq;
  const double half_energy = 0.5 * h.energy();
  pair.log_rn = stochastic.value() + half_energy;
  pair.log_rn_reference = stochastic.value() - half_energy;
  return pair;
}

namespace {

template <class Get>
std::vector<double> column(const std::vector<CoupledSample>& samples, Get get) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.diverged) out.push_back(get(s));
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> CoupledEnsemble::diverged() const {
  std::vector<std::uint32_t> out;
  for (const auto& s : samples) {
    if (s.diverged) out.push_back(s.replicate);
  }
  return out;
}

std::vector<double> CoupledEnsemble::gaps() const {
  return column(samples, [](const CoupledSample& s) { return s.sup_gap_sq; });
}
std::vector<double> CoupledEnsemble::log_rns() const {
  return column(samples, [](const CoupledSample& s) { return s.log_rn; });
}
std::vector<double> CoupledEnsemble::log_rn_references() const {
  return column(samples, [](const CoupledSample& s) { return s.log_rn_reference; });
}
std::vector<double> CoupledEnsemble::shifted_values(std::size_t i) const {
  return column(samples, [i](const CoupledSample& s) { return s.fx.at(i); });
}
std::vector<double> CoupledEnsemble::unshifted_values(std::size_t i) const {
  return column(samples, [i](const CoupledSample& s) { return s.fy.at(i); });
}

CoupledEnsemble run_coupled_ensemble(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                                     const ShiftFunction& h, const std::vector<FunctionalSpec>& functionals,
                                     int replicates, std::uint64_t experiment_seed) {
  if (replicates < 2) throw ParameterError("replicates must be >= 2");
  SolverConfig run_cfg = cfg;
  run_cfg.store_stride = 0;
  for (const auto& f : functionals) {
    if (f.kind == FunctionalKind::kLinearProbe && f.probe.size() != model.dim()) {
      throw ParameterError("linear probe dimension does not match the model");
    }
  }
  CoupledEnsemble ens;
  ens.experiment_seed = experiment_seed;
  ens.functionals = functionals;
  ens.samples.resize(static_cast<std::size_t>(replicates));
  parallel_for(replicates, [&](int r) {
    CoupledSample& out = ens.samples[static_cast<std::size_t>(r)];
    out.replicate = static_cast<std::uint32_t>(r);
    try {
      const CoupledPair pair = coupled_solve(model, run_cfg, x0, h, {experiment_seed, out.replicate, 0});
      out.sup_gap_sq = pair.sup_gap_sq;
      out.log_rn = pair.log_rn;
      out.log_rn_reference = pair.log_rn_reference;
      for (const auto& f : functionals) {
        out.fx.push_back(f(pair.x_traj));
        out.fy.push_back(f(pair.y_traj));
      }
    } catch (const DivergenceError& e) {
      out.diverged = true;
      out.divergence_step = static_cast<long>(e.step());
    }
  });
  return ens;
}

T2ConstantQuery t2_query(const Model& model, double T) {
  const AssumptionConstants& c = model.spec().constants;
  return {T, c.K2, c.C_B, c.C1};
}

ContractionReport contraction_report(const CoupledEnsemble& ensemble, const ShiftFunction& h,
                                     const T2Constant& constant) {
  ContractionReport r;
  const std::vector<double> gaps = ensemble.gaps();
  r.gap = mean_estimate(gaps);
  r.shift_energy = h.energy();
  r.entropy = shift_entropy(h);
  r.constant = constant;
  r.bound = constant.value * r.shift_energy;
  r.margin = r.bound - (r.gap.mean + 3.0 * r.gap.std_error);
  r.diverged = ensemble.diverged();
  r.pass = r.diverged.empty() && r.margin >= 0.0;
  return r;
}

ContractionReport contraction_report(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                                     const ShiftFunction& h, int replicates, std::uint64_t experiment_seed) {
  const CoupledEnsemble ens = run_coupled_ensemble(model, cfg, x0, h, {}, replicates, experiment_seed);
  return contraction_report(ens, h, t2_constant(t2_query(model, cfg.T)));
}

void to_json(nlohmann::json& j, const MeanEstimate& e) {
  j = nlohmann::json{{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}};
}

void to_json(nlohmann::json& j, const ContractionReport& r) {
  j = nlohmann::json{{"sup_gap_sq", r.gap},
                     {"shift_energy", r.shift_energy},
                     {"entropy", r.entropy},
                     {"C_T2", r.constant},
                     {"bound", r.bound},
                     {"margin", r.margin},
                     {"diverged_replicates", r.diverged},
                     {"pass", r.pass}};
}

}  // namespace tci

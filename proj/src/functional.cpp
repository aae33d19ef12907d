#include "tci/functional.hpp"

#include <algorithm>
#include <cmath>

#include "tci/errors.hpp"

namespace tci {

std::string FunctionalSpec::name() const {
  switch (kind) {
    case FunctionalKind::kL2VPathNorm: return "l2_V_path_norm";
    case FunctionalKind::kSupHNorm: return "sup_H_norm";
    case FunctionalKind::kTerminalHNorm: return "terminal_H_norm";
    case FunctionalKind::kLinearProbe: return "linear_probe";
  }
  return "unknown";
}

double FunctionalSpec::operator()(const Trajectory& path) const {
  switch (kind) {
    case FunctionalKind::kL2VPathNorm: return std::sqrt(path.total_v_energy());
    case FunctionalKind::kSupHNorm: return path.max_h_norm();
    case FunctionalKind::kTerminalHNorm: return path.h_norms.back();
    case FunctionalKind::kLinearProbe:
      if (probe.size() != path.final_state.size()) throw ParameterError("probe dimension mismatch");
      return probe.dot(path.final_state);
  }
  return 0.0;
}

FunctionalSpec functional_from_name(const std::string& name, int dim) {
  if (name == "l2_V_path_norm") return FunctionalSpec::l2_v_path_norm();
  if (name == "sup_H_norm") return FunctionalSpec::sup_h_norm();
  if (name == "terminal_H_norm") return FunctionalSpec::terminal_h_norm();
  if (name == "linear_probe") {
    // Default probe: the first basis mode.
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    g[0] = 1.0;
    return FunctionalSpec::linear_probe(g);
  }
  throw SchemaError("unknown functional '" + name + "'");
}

double path_distance(const Model& model, const Trajectory& a, const Trajectory& b, PathMetric metric, double dt) {
  if (a.states.size() != b.states.size() || a.states.size() != a.times.size()) {
    throw ParameterError("path distance needs both paths stored at every grid point");
  }
  if (metric == PathMetric::kUniformH) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) worst = std::max(worst, (a.states[k] - b.states[k]).norm());
    return worst;
  }
  double sum = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    const double d = model.norm_v(a.states[k] - b.states[k]);
    if (k > 0) sum += 0.5 * dt * (prev * prev + d * d);
    prev = d;
  }
  return std::sqrt(sum);
}

}  // namespace tci

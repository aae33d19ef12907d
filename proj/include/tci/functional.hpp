#pragma once

#include <string>

#include <Eigen/Core>
#include "json.hpp"

#include "tci/solver.hpp"

namespace tci {

enum class FunctionalKind { kL2VPathNorm, kSupHNorm, kTerminalHNorm, kLinearProbe };
enum class PathMetric { kL2VPath, kUniformH };

/// Scalar path functional with its declared Lipschitz constant:
///   l2_V_path_norm  (int ||u||_V^2 dt)^(1/2)   1-Lipschitz, L2_V_path
///   sup_H_norm      sup_t ||u_t||_H             1-Lipschitz, uniform_H
///   terminal_H_norm ||u_T||_H                   1-Lipschitz, uniform_H
///   linear_probe    <g, u_T>_H                  ||g||_H,     uniform_H
struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::kSupHNorm;
  Eigen::VectorXd probe;  // linear_probe only

  static FunctionalSpec l2_v_path_norm() { return {FunctionalKind::kL2VPathNorm, {}}; }
  static FunctionalSpec sup_h_norm() { return {FunctionalKind::kSupHNorm, {}}; }
  static FunctionalSpec terminal_h_norm() { return {FunctionalKind::kTerminalHNorm, {}}; }
  static FunctionalSpec linear_probe(Eigen::VectorXd g) { return {FunctionalKind::kLinearProbe, std::move(g)}; }

  PathMetric metric() const { return kind == FunctionalKind::kL2VPathNorm ? PathMetric::kL2VPath : PathMetric::kUniformH; }
  double lipschitz_constant() const { return kind == FunctionalKind::kLinearProbe ? probe.norm() : 1.0; }
  std::string name() const;

  double operator()(const Trajectory& path) const;
};

FunctionalSpec functional_from_name(const std::string& name, int dim);

/// Distance between two paths on the same grid in the given metric. Needs
/// every state stored (store_stride = 1).
double path_distance(const Model& model, const Trajectory& a, const Trajectory& b, PathMetric metric, double dt);

}  // namespace tci

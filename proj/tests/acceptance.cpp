// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "tci/concentration.hpp"
#include "tci/constants.hpp"
#include "tci/experiment.hpp"
#include "tci/inequalities.hpp"
#include "tci/problem.hpp"
#include "tci/solver.hpp"

using namespace tci;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

ExperimentConfig config_file(const std::string& name) { return load_config(std::string(TCI_CONFIG_DIR) + "/" + name); }

class WorkerOverride {
 public:
  explicit WorkerOverride(const std::string& n) {
    if (const char* s = std::getenv("TCI_SPDE_WORKERS")) saved_ = s;
    setenv("TCI_SPDE_WORKERS", n.c_str(), 1);
  }
  ~WorkerOverride() {
    if (saved_.empty()) {
      unsetenv("TCI_SPDE_WORKERS");
    } else {
      setenv("TCI_SPDE_WORKERS", saved_.c_str(), 1);
    }
  }

 private:
  std::string saved_;
};

double t2_grid_oracle(const T2ConstantQuery& q) {
  constexpr int n = 1000;
  double lo1 = 0.0, hi1 = 1.0, lo2 = 0.0, hi2 = 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (int zoom = 0; zoom < 4; ++zoom) {
    double b1 = 0.5, b2 = 0.25;
    for (int i = 1; i < n; ++i) {
      const double e1 = lo1 + (hi1 - lo1) * i / n;
      for (int j = 1; j < n; ++j) {
        const double e2 = lo2 + (hi2 - lo2) * j / n;
        if (e1 + e2 >= 1.0) continue;
        const double v = t2_objective(q, e1, e2);
        if (v < best) {
          best = v;
          b1 = e1;
          b2 = e2;
        }
      }
    }
    const double w1 = 2.0 * (hi1 - lo1) / n;
    const double w2 = 2.0 * (hi2 - lo2) / n;
    lo1 = std::max(0.0, b1 - w1);
    hi1 = std::min(1.0, b1 + w1);
    lo2 = std::max(0.0, b2 - w2);
    hi2 = std::min(1.0, b2 + w2);
  }
  return best;
}

Outcome c1_constants() {
  CounterStream s({101, 0, 0}, StreamTag::kSynthetic);
  double worst = 0.0;
  double seconds = 0.0;
  for (int i = 0; i < 10; ++i) {
    const T2ConstantQuery q{0.1 + 2.9 * s.uniform(), 0.05 + 2.95 * s.uniform(), 0.1 + 2.9 * s.uniform(),
                            0.5 + 2.5 * s.uniform()};
    const auto start = std::chrono::steady_clock::now();
    const double value = t2_constant(q).value;
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double oracle = t2_grid_oracle(q);
    worst = std::max(worst, std::abs(value - oracle) / oracle);
  }
  double worst_zero = 0.0;
  for (double cb : {0.3, 1.0, 2.7}) {
    for (double k2 : {0.0, -1.0}) {
      const auto start = std::chrono::steady_clock::now();
      const double value = t2_constant({1.3, k2, cb, 2.0}).value;
      seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      worst_zero = std::max(worst_zero, std::abs(value - 4.0 * cb) / (4.0 * cb));
    }
  }
  return {worst <= 1e-6 && worst_zero <= 1e-4 && seconds < 10.0,
          "max rel err vs grid oracle " + fmt("%.2e", worst) + ", K2<=0 rel err " + fmt("%.2e", worst_zero) +
              ", optimizer time " + fmt("%.3f", seconds) + " s"};
}

struct T2Runs {
  json coarse;  // 4096 replicates, dt = 1e-3
  json fine;    // dt = 2.5e-4
  json standard;  // config as shipped (2048 replicates)
};

const T2Runs& t2_runs() {
  static const T2Runs runs = [] {
    T2Runs r;
    ExperimentConfig cfg = config_file("heat_verify_t2.json");
    r.standard = run_experiment("verify-t2", cfg).report;
    cfg.replicates = 4096;
    r.coarse = run_experiment("verify-t2", cfg).report;
    cfg.replicates = 256;
    cfg.solver.dt = 2.5e-4;
    r.fine = run_experiment("verify-t2", cfg).report;
    return r;
  }();
  return runs;
}

Outcome c2_girsanov() {
  const json& g = t2_runs().coarse.at("results").at("girsanov");
  const double m = g.at("exp_log_rn_reference").at("mean");
  const double m_se = g.at("exp_log_rn_reference").at("std_error");
  const double l = g.at("log_rn").at("mean");
  const double l_se = g.at("log_rn").at("std_error");
  const double entropy = g.at("entropy");
  const int n = g.at("log_rn").at("n");
  const bool pass = n == 4096 && std::abs(m - 1.0) <= 3.0 * m_se && std::abs(l - entropy) <= 3.0 * l_se;
  return {pass, "E[M_T] = " + fmt("%.4f", m) + " +- " + fmt("%.4f", m_se) + ", E_Q[log M_T] = " + fmt("%.4f", l) +
                    " +- " + fmt("%.4f", l_se) + " vs " + fmt("%.4f", entropy)};
}

Outcome c3_contraction() {
  const json& c = t2_runs().coarse.at("results").at("contraction");
  const double mean = c.at("sup_gap_sq").at("mean");
  const double se = c.at("sup_gap_sq").at("std_error");
  const double bound = c.at("bound");
  const double fine = t2_runs().fine.at("results").at("contraction").at("sup_gap_sq").at("mean");
  const double oracle = std::pow((1.0 - std::exp(-kPi * kPi)) / (kPi * kPi), 2);
  const double rel = std::abs(fine - oracle) / oracle;
  const bool pass = mean + 3.0 * se <= bound && std::abs(bound - 4.0) <= 4e-4 && rel <= 0.05;
  return {pass, "E sup gap^2 = " + fmt("%.5f", mean) + " (+3se " + fmt("%.2e", 3 * se) + ") <= " + fmt("%.4f", bound) +
                    "; dt=2.5e-4 mean " + fmt("%.5f", fine) + " vs ODE oracle " + fmt("%.5f", oracle) + " (rel " +
                    fmt("%.3f", rel) + ")"};
}

Outcome c4_w2() {
  for (const auto& chain : t2_runs().standard.at("results").at("t2_chain")) {
    if (chain.at("functional") != "sup_H_norm") continue;
    const double w2 = chain.at("w2");
    const double bound = chain.at("bound");
    const double se = chain.at("combined_se");
    const bool pass = w2 <= bound && bound - w2 > 10.0 * se;
    return {pass, "W2 = " + fmt("%.4f", w2) + ", bound " + fmt("%.4f", bound) + ", margin/se = " +
                      fmt("%.1f", (bound - w2) / se)};
  }
  return {false, "sup_H_norm chain missing from report"};
}

struct T1Run {
  json exp_estimate;
  json bobkov_gotze;
};

T1Run t1_run(const std::string& file, int replicates) {
  ExperimentConfig cfg = config_file(file);
  cfg.replicates = replicates;
  cfg.lambda_grid = {-1.0, -0.5, -0.1, 0.1, 0.5, 1.0};
  const json r = run_experiment("verify-t1", cfg).report.at("results");
  return {r.at("exp_estimate"), r.at("bobkov_gotze")};
}

Outcome c5_exp_estimate() {
  std::ostringstream detail;
  bool pass = true;
  for (const char* file : {"heat_verify_t1.json", "burgers_verify_t1.json"}) {
    const json e = t1_run(file, 2048).exp_estimate;
    const double est = e.at("estimate");
    const double se = e.at("std_error");
    const double rhs = e.at("rhs");
    const bool ok = !e.at("infinite").get<bool>() && est + 3.0 * se <= rhs;
    pass = pass && ok;
    detail << file << ": " << fmt("%.4f", est) << " +3se " << fmt("%.4f", 3 * se) << " <= " << fmt("%.4f", rhs)
           << (ok ? "" : " (FAILED)") << "; ";
  }
  return {pass, detail.str()};
}

Outcome c6_bobkov_gotze() {
  std::ostringstream detail;
  bool pass = true;
  for (const char* file : {"heat_verify_t1.json", "burgers_verify_t1.json"}) {
    const json bg = t1_run(file, 4096).bobkov_gotze;
    double min_rel_margin = std::numeric_limits<double>::infinity();
    for (const auto& row : bg.at("rows")) {
      pass = pass && row.at("conservative_pass").get<bool>();
      min_rel_margin = std::min(min_rel_margin, row.at("margin").get<double>() / row.at("bound").get<double>());
    }
    detail << file << " min relative margin " << fmt("%.3f", min_rel_margin) << "; ";
  }

  const double sigma = 1.0;
  const std::vector<double> lambdas{-1.0, -0.5, -0.1, 0.1, 0.5, 1.0};
  Ensemble pos;
  pos.values = gaussian_samples(100000, sigma, 61);
  const bool positive = bobkov_gotze_check(pos, sigma * sigma, lambdas).no_violation();
  const std::vector<double> large{-3.0, -2.0, 2.0, 3.0};
  const BobkovGotzeReport neg = bobkov_gotze_check(pos, sigma * sigma / 4.0, large);
  bool negative = true;
  for (const auto& row : neg.rows) negative = negative && row.violation;
  pass = pass && positive && negative;
  detail << "Gaussian control C=sigma^2 " << (positive ? "no violation" : "VIOLATION") << ", C=sigma^2/4 at |lambda|>=2 "
         << (negative ? "violations flagged" : "NOT flagged");
  return {pass, detail.str()};
}

Outcome c7_inequalities() {
  const InequalityReport r = inequality_suite(1000, 20240601, 32, 16);
  std::ostringstream detail;
  int violations = 0;
  for (const auto& s : r.suites) {
    violations += s.violations;
    detail << s.name << ' ' << s.violations << '/' << s.samples << "; ";
  }
  return {r.all_pass() && violations == 0, detail.str()};
}

Outcome c8_solver() {
  NoiseOperator silent;
  silent.gains = Eigen::VectorXd::Zero(1);
  const Resolution r1{32, 4, true, 0};
  const Model heat(make_heat(silent), r1);
  const Eigen::VectorXd x0 = heat.to_modal(Field1D::sine(32, 1));
  std::vector<double> xs, ys;
  for (int i = 0; i <= 4; ++i) {
    SolverConfig cfg;
    cfg.dt = 0.01 / std::pow(2.0, i);
    cfg.T = 1.0;
    cfg.resolution = r1;
    cfg.store_stride = 0;
    const Trajectory tr = solve(heat, cfg, x0, {0, 0, 0});
    const double err = (tr.final_state - x0 * std::exp(-kPi * kPi)).norm();
    xs.push_back(std::log(cfg.dt));
    ys.push_back(std::log(err));
  }
  const double n = static_cast<double>(xs.size());
  const double sx = std::accumulate(xs.begin(), xs.end(), 0.0);
  const double sy = std::accumulate(ys.begin(), ys.end(), 0.0);
  const double sxx = std::inner_product(xs.begin(), xs.end(), xs.begin(), 0.0);
  const double sxy = std::inner_product(xs.begin(), xs.end(), ys.begin(), 0.0);
  const double order = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  const int K = 32;
  const double nu = 0.1;
  const Resolution r2{8, K, true, 0};
  const Model ns(make_navier_stokes(silent, nu), r2);
  const Eigen::VectorXd tg = ns.to_modal(taylor_green(K));
  const double projected = ns.nonlinear(tg).norm();
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.1;
  cfg.resolution = r2;
  cfg.store_stride = 0;
  const Trajectory tr = solve(ns, cfg, tg, {0, 0, 0});
  const double rate = -std::log(tr.final_state.norm() / tg.norm()) / cfg.T;
  const double exact = 8.0 * kPi * kPi * nu;
  const double rate_err = std::abs(rate - exact) / exact;
  const bool pass = std::abs(order - 1.0) <= 0.15 && projected <= 1e-10 && rate_err <= 0.01;
  return {pass, "heat order " + fmt("%.3f", order) + ", TG ||P[(u.grad)u]|| = " + fmt("%.1e", projected) +
                    ", decay rate rel err " + fmt("%.4f", rate_err)};
}

Outcome c9_wasserstein() {
  CounterStream s({909, 0, 0}, StreamTag::kSynthetic);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(s.uniform() * 8.0);
    const int d = 1 + static_cast<int>(s.uniform() * 3.0);
    Eigen::MatrixXd a(n, d), b(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        a(i, j) = s.normal();
        b(i, j) = s.normal();
      }
    }
    const Eigen::MatrixXd cost = squared_distance_matrix(a, b);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (w2_small_cloud(a, b) != std::sqrt(best / n)) ++mismatches;
  }
  const double hand = w2_sorted_1d(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 3.0});
  return {mismatches == 0 && std::abs(hand - std::sqrt(2.0)) <= 1e-15,
          std::to_string(mismatches) + "/100 mismatches vs brute force; {0,1} vs {0,3} -> " + fmt("%.15f", hand)};
}

Outcome c10_reproducibility() {
  struct Case {
    const char* sub;
    const char* file;
  };
  const std::vector<Case> cases{{"verify-t2", "heat_verify_t2.json"},
                                {"verify-t1", "burgers_verify_t1.json"},
                                {"simulate", "heat_simulate.json"},
                                {"audit", "burgers_audit.json"}};
  std::ostringstream detail;
  bool pass = true;
  for (const auto& c : cases) {
    const ExperimentConfig cfg = config_file(c.file);
    std::string serial, parallel, repeat;
    {
      WorkerOverride w("1");
      serial = report_text(run_experiment(c.sub, cfg).report);
    }
    {
      WorkerOverride w("4");
      parallel = report_text(run_experiment(c.sub, cfg).report);
      repeat = report_text(run_experiment(c.sub, cfg).report);
    }
    const bool same = serial == parallel && parallel == repeat;
    pass = pass && same;
    detail << c.sub << ' ' << (same ? "identical" : "DIFFERS") << "; ";
  }
  return {pass, detail.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 constants oracle equivalence", c1_constants},
      {"C2 Girsanov normalization", c2_girsanov},
      {"C3 contraction chain", c3_contraction},
      {"C4 T2 functional-marginal domination", c4_w2},
      {"C5 exponential estimate", c5_exp_estimate},
      {"C6 Bobkov-Gotze suite", c6_bobkov_gotze},
      {"C7 inequality property suites", c7_inequalities},
      {"C8 solver oracles", c8_solver},
      {"C9 Wasserstein oracles", c9_wasserstein},
      {"C10 reproducibility", c10_reproducibility},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << fmt("%.1f", seconds) << " s]: " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << '/' << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

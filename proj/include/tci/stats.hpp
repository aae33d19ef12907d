#pragma once

#include <cmath>
#include <span>

namespace tci {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  double variance = 0.0;
  std::size_t n = 0;
};

inline MeanEstimate mean_estimate(std::span<const double> values) {
  MeanEstimate e;
  e.n = values.size();
  if (e.n == 0) return e;
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  e.mean = sum.value() / static_cast<double>(e.n);
  if (e.n < 2) return e;
  CompensatedSum sq;
  for (double v : values) sq.add((v - e.mean) * (v - e.mean));
  e.variance = sq.value() / static_cast<double>(e.n - 1);
  e.std_error = std::sqrt(e.variance / static_cast<double>(e.n));
  return e;
}

}  // namespace tci

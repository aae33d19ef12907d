#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace tci {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the output
/// depends only on (counter, key).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMulA = 0xD2511F53u;
  constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  constexpr std::uint32_t kWeylB = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

/// Purpose tags keep streams used for different things disjoint even when
/// (seed, replicate, step) coincide.
enum class StreamTag : std::uint32_t {
  kNoise = 1,
  kRandomField = 2,
  kSynthetic = 3,
  kAudit = 4,
};

/// Identifies one random stream. The mapping to Philox (key, counter) is
/// injective in (experiment_seed, replicate, step, tag).
struct SeedSpec {
  std::uint64_t experiment_seed = 0;
  std::uint32_t replicate = 0;
  std::uint32_t step = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Counter-based stream of normals and uniforms. Cheap to construct; holds no
/// state beyond a block index, so a stream can be rebuilt anywhere.
class CounterStream {
 public:
  CounterStream(const SeedSpec& seed, StreamTag tag)
      : key_{static_cast<std::uint32_t>(seed.experiment_seed),
             static_cast<std::uint32_t>(seed.experiment_seed >> 32)},
        step_(seed.step),
        replicate_(seed.replicate),
        tag_(static_cast<std::uint32_t>(tag)) {}

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    if (cached_uniforms_ == 0) refill();
    return uniforms_[--cached_uniforms_];
  }

  /// Standard normal by Box-Muller on consecutive uniform pairs.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Eigen::VectorXd normals(Eigen::Index n) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
    return out;
  }

 private:
  void refill() {
    const auto block = philox4x32({block_++, step_, replicate_, tag_}, key_);
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    for (int i = 0; i < 2; ++i) {
      const std::uint64_t bits =
          (static_cast<std::uint64_t>(block[2 * i]) << 21) ^ (block[2 * i + 1] >> 11);
      // bits < 2^53; shift to the cell midpoint so 0 and 1 are never produced
      uniforms_[i] = (static_cast<double>(bits & ((1ull << 53) - 1)) + 0.5) * kScale;
    }
    cached_uniforms_ = 2;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t step_;
  std::uint32_t replicate_;
  std::uint32_t tag_;
  std::uint32_t block_ = 0;
  std::array<double, 2> uniforms_{};
  int cached_uniforms_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tci

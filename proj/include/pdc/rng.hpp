#pragma once

// Counter-based random numbers.
//
// Every Monte Carlo replicate owns a stream identified by (master seed,
// stream id). The underlying block cipher is Philox4x32-10 (Salmon et al.,
// SC'11): the key is derived from the seed and the 128-bit counter holds the
// stream id in its upper half and a block index in its lower half. Draws for
// replicate i therefore never depend on how many other replicates ran before
// it, or on which thread ran it.
//
// Variate generation (normal, gamma, binomial, ...) is implemented here
// rather than through <random> distributions, whose algorithms are
// implementation-defined and differ between standard libraries.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "pdc/special.hpp"

namespace pdc {

class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using counter_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        counter_{0u, 0u, static_cast<std::uint32_t>(stream),
                 static_cast<std::uint32_t>(stream >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (index_ == 4) {
      block_ = encrypt(counter_, key_);
      increment();
      index_ = 0;
    }
    return block_[index_++];
  }

  /// One Philox4x32-10 block; exposed for known-answer tests.
  static counter_type encrypt(counter_type ctr, key_type key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  void increment() {
    if (++counter_[0] == 0) ++counter_[1];
  }

  key_type key_;
  counter_type counter_;
  counter_type block_{};
  int index_ = 4;
};

/// Generator handed to samplers. Cheap to construct; one per replicate/fit.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(seed, stream) {}

  /// Stream for sub-task `index` of a task that itself runs on `stream`.
  static std::uint64_t substream(std::uint64_t stream, std::uint64_t index) {
    // splitmix64 finalizer keeps nested stream ids well separated
    std::uint64_t z = stream * 0x9E3779B97F4A7C15ull + index + 0x632BE59BD9B4E019ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint32_t next_u32() { return engine_(); }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = engine_() >> 5;  // 27 bits
    const std::uint64_t lo = engine_() >> 6;  // 26 bits
    const std::uint64_t bits = (hi << 26) | lo;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Gamma(shape, rate = 1) by Marsaglia & Tsang, with the shape + 1 boost
  /// for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  /// Binomial(n, p) by exact inversion, visiting outcomes outward from the
  /// mode so the expected cost is O(sqrt(n p (1 - p))).
  long binomial(long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    const long mode = std::min(n, static_cast<long>(std::floor((n + 1) * p)));
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double pmf_mode =
        std::exp(log_choose(static_cast<double>(n), static_cast<double>(mode)) + mode * log_p +
                 (n - mode) * log_q);
    const double odds = p / (1.0 - p);

    double u = uniform();
    u -= pmf_mode;
    if (u <= 0.0) return mode;
    long lo = mode, hi = mode;
    double pmf_lo = pmf_mode, pmf_hi = pmf_mode;
    while (lo > 0 || hi < n) {
      if (hi < n) {
        pmf_hi *= odds * static_cast<double>(n - hi) / static_cast<double>(hi + 1);
        ++hi;
        u -= pmf_hi;
        if (u <= 0.0) return hi;
      }
      if (lo > 0) {
        pmf_lo *= static_cast<double>(lo) / (odds * static_cast<double>(n - lo + 1));
        --lo;
        u -= pmf_lo;
        if (u <= 0.0) return lo;
      }
      if (pmf_lo < 1e-300 && pmf_hi < 1e-300) break;
    }
    // the remaining mass is below double resolution
    return mode;
  }

 private:
  Philox4x32 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pdc

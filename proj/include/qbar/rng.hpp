#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace qbar {

/// splitmix64 finalizer; bijective 64-bit mix.
uint64_t mix64(uint64_t x);

/// Derives an independent stream seed from a parent seed and a list of tags
/// (creator index, video index, purpose word, ...). Pure function.
uint64_t derive_seed(uint64_t seed, std::initializer_list<uint64_t> tags);

/// Deterministic random source. The engine is std::mt19937_64, whose output
/// sequence is pinned by the standard; the distribution mappings below are
/// spelled out by hand because the std::*_distribution algorithms are
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; consumes two uniforms per pair and
  /// caches the second variate.
  double gaussian();

  /// Uniform integer in [0, n); unbiased via rejection.
  uint64_t below(uint64_t n);

  /// Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Pairwise (cascade) summation; fixed reduction tree, independent of the
/// caller's thread layout.
double pairwise_sum(std::span<const double> xs);

}  // namespace qbar

#pragma once

// Counter-based Philox4x64-10 generator. A (seed, stream) pair is the key, so
// any number of independent reproducible streams can be derived from one
// user seed without coordination.

#include <array>
#include <cstdint>
#include <limits>

namespace mghmc {

class Philox4x64 {
 public:
  using result_type = std::uint64_t;
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  Philox4x64() : Philox4x64(0, 0) {}
  Philox4x64(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// The raw 10-round bijection.
  static Counter block(Counter ctr, Key key);

  const Key& key() const { return key_; }
  const Counter& counter() const { return counter_; }
  int buffered() const { return 4 - index_; }

 private:
  Key key_;
  Counter counter_{};
  Counter buffer_{};
  int index_ = 4;
};

/// Philox stream plus the distributions the samplers need.
class Rng {
 public:
  Rng() = default;
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();

  Philox4x64& engine() { return engine_; }

 private:
  Philox4x64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Stream id of cell `index` under a user seed; used for per-cell streams in
/// sweeps and tables.
std::uint64_t derive_stream(std::uint64_t base_stream, std::uint64_t index);

}  // namespace mghmc

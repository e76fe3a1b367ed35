#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace macmarl {

/// Explicitly passed random stream.
///
/// Every draw is derived from the raw 64-bit engine output, so a sequence is
/// fully determined by the seed and does not depend on the standard library's
/// distribution implementations. The engine state can be serialized for
/// checkpointing.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t uniform_int(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  std::string state() const;
  void set_state(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream index (splitmix64 finalizer). Used to give
/// evaluation, initialization and per-seed workers independent streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace macmarl

#pragma once

// Counter-based random streams. A stream is a pure function of its key and
// draw index, so results never depend on scheduling: streams are addressed
// by (seed, iteration, coordinate, op tag) via fork().

#include <cstdint>

namespace lpgd {

enum class OpTag : std::uint64_t {
  gradient = 0x67726164,  // rounding ops inside a gradient recipe
  step = 0x73746570,      // rounding of t * g~
  update = 0x75706474,    // lowfloat rounding of x - t * g~
  input = 0x696e7075,     // rounding of a non-representable input point
  sample = 0x73616d70,    // Monte Carlo sampling in oracles
  data = 0x64617461,      // synthetic dataset generation
};

std::uint64_t mix64(std::uint64_t z);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(mix64(seed ^ 0x6c70676473656564ULL)) {}

  RandomStream fork(std::uint64_t label) const { return RandomStream(key_, label); }
  RandomStream fork(OpTag tag) const { return fork(static_cast<std::uint64_t>(tag)); }

  // Draw index n of this stream, independent of how many draws came before.
  std::uint64_t at(std::uint64_t n) const { return mix64(mix64(key_ + n * 0x9e3779b97f4a7c15ULL) ^ key_); }
  std::uint64_t next() { return at(counter_++); }
  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  RandomStream(std::uint64_t parent, std::uint64_t label)
      : key_(mix64(parent ^ mix64(label + 0x632be59bd9b4e019ULL))) {}
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace lpgd

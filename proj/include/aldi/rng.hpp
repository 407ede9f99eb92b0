#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "aldi/ensemble.hpp"

namespace aldi {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive combination of a base seed with a list of indices. Used to
/// bind independent streams to (seed, step), (seed, family, N, repetition), ...
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices);

/// Seeded Mersenne Twister with Gaussian helpers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  /// rows x cols standard normals, filled column by column.
  Matrix standard_normal(Index rows, Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Standard-normal block that depends only on (seed, step). Column i is the
/// increment bound to particle i.
Matrix step_noise(std::uint64_t seed, std::uint64_t step, Index rows, Index cols);

}  // namespace aldi

#include "aldi/rng.hpp"

namespace aldi {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = mix64(base);
  for (std::uint64_t idx : indices) h = mix64(h ^ mix64(idx + 0x632be59bd9b4e019ULL));
  return h;
}

Matrix RandomStream::standard_normal(Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = normal_(engine_);
  }
  return out;
}

Matrix step_noise(std::uint64_t seed, std::uint64_t step, Index rows, Index cols) {
  RandomStream stream(derive_seed(seed, {step}));
  return stream.standard_normal(rows, cols);
}

}  // namespace aldi

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace aldi {

/// Input rejected by a precondition check (shape mismatch, bad window, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sampler/target combination that cannot run, e.g. a gradient-based family on
/// a target without a gradient.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value produced during evaluation or integration.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what,
                        std::optional<std::ptrdiff_t> particle = std::nullopt,
                        std::optional<std::size_t> step = std::nullopt);

  std::optional<std::ptrdiff_t> particle() const { return particle_; }
  std::optional<std::size_t> step() const { return step_; }
  const std::string& detail() const { return detail_; }

  NumericError at_particle(std::ptrdiff_t particle) const;
  NumericError at_step(std::size_t step) const;

 private:
  std::string detail_;
  std::optional<std::ptrdiff_t> particle_;
  std::optional<std::size_t> step_;
};

}  // namespace aldi

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "danyra/problem.hpp"

namespace danyra {

/// Minimum buffer omega_k of the virtual queue.
///
/// - constant:  omega_k = omega
/// - decaying:  omega_k = coefficient / max(k + shift, 1)
///              (shift = 1 gives c/(k+1); shift = 0 gives c/k with omega_0 = c)
/// - sequence:  omega_k = values[k], holding the last value past the end
class BufferSchedule {
 public:
  enum class Kind { kConstant, kDecaying, kSequence };

  BufferSchedule() = default;

  static BufferSchedule constant(double omega);
  static BufferSchedule decaying(double coefficient, long shift = 1);
  static BufferSchedule sequence(std::vector<double> values);

  double omega(std::size_t k) const;

  /// True when sum_k omega_k^2 < infinity.
  bool square_summable() const noexcept;

  Kind kind() const noexcept { return kind_; }
  double constant_value() const noexcept { return value_; }
  double coefficient() const noexcept { return value_; }
  long shift() const noexcept { return shift_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  Kind kind_ = Kind::kConstant;
  double value_ = 0.0;
  long shift_ = 1;
  std::vector<double> values_;
};

struct HyperParams {
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
  BufferSchedule buffer;
};

/// Throws InvalidHyperParams unless alpha, beta, eta, gamma > 0 and gamma < 1.
void validate(const HyperParams& hp);

/// One sufficient-condition inequality: `supplied` must be strictly less
/// than `bound` (strictly greater for the lower bound on gamma).
struct Condition {
  std::string name;
  double bound = 0.0;
  double supplied = 0.0;
  bool passed = false;
};

struct ConditionReport {
  std::vector<Condition> conditions;
  double c = 0.0;                       // (1-gamma)^2 (1-3 beta) / (2 gamma^2)
  std::optional<double> theta_prime;    // equality mode, all checks passing

  bool all_passed() const noexcept;
  const Condition* find(const std::string& name) const noexcept;
};

/// Evaluates the convergence conditions on (alpha, beta, eta, gamma) for the
/// inequality algorithm, plus the extra step-size condition and the linear
/// rate theta' for the equality algorithm. Report only: the conditions are
/// sufficient, so a failing report never stops a run.
ConditionReport validate_hyperparams(const HyperParams& hp, const SpectralConstants& sc,
                                     ConstraintMode mode);

}  // namespace danyra

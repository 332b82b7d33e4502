#include "danyra/hyperparams.hpp"

#include <algorithm>
#include <cmath>

#include "danyra/error.hpp"

namespace danyra {

BufferSchedule BufferSchedule::constant(double omega) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw InvalidHyperParams("buffer omega must be finite and >= 0");
  }
  BufferSchedule s;
  s.kind_ = Kind::kConstant;
  s.value_ = omega;
  return s;
}

BufferSchedule BufferSchedule::decaying(double coefficient, long shift) {
  if (!(coefficient >= 0.0) || !std::isfinite(coefficient)) {
    throw InvalidHyperParams("decaying buffer coefficient must be finite and >= 0");
  }
  if (shift < 0) throw InvalidHyperParams("decaying buffer shift must be >= 0");
  BufferSchedule s;
  s.kind_ = Kind::kDecaying;
  s.value_ = coefficient;
  s.shift_ = shift;
  return s;
}

BufferSchedule BufferSchedule::sequence(std::vector<double> values) {
  if (values.empty()) throw InvalidHyperParams("buffer sequence is empty");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidHyperParams("buffer sequence entries must be finite and >= 0");
    }
  }
  BufferSchedule s;
  s.kind_ = Kind::kSequence;
  s.values_ = std::move(values);
  return s;
}

double BufferSchedule::omega(std::size_t k) const {
  switch (kind_) {
    case Kind::kConstant:
      return value_;
    case Kind::kDecaying: {
      const double denom = std::max(static_cast<double>(k) + static_cast<double>(shift_), 1.0);
      return value_ / denom;
    }
    case Kind::kSequence:
      return values_[std::min(k, values_.size() - 1)];
  }
  return 0.0;
}

bool BufferSchedule::square_summable() const noexcept {
  switch (kind_) {
    case Kind::kConstant:
      return value_ == 0.0;
    case Kind::kDecaying:
      return true;  // sum c^2 / k^2 converges
    case Kind::kSequence:
      return values_.back() == 0.0;
  }
  return false;
}

void validate(const HyperParams& hp) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidHyperParams(std::string(name) + " must be positive and finite");
    }
  };
  positive(hp.alpha, "alpha");
  positive(hp.beta, "beta");
  positive(hp.eta, "eta");
  positive(hp.gamma, "gamma");
  if (!(hp.gamma < 1.0)) throw InvalidHyperParams("gamma must be < 1");
}

bool ConditionReport::all_passed() const noexcept {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const Condition& c) { return c.passed; });
}

const Condition* ConditionReport::find(const std::string& name) const noexcept {
  for (const auto& c : conditions) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ConditionReport validate_hyperparams(const HyperParams& hp, const SpectralConstants& sc,
                                     ConstraintMode mode) {
  const double a = hp.alpha;
  const double b = hp.beta;
  const double e = hp.eta;
  const double g = hp.gamma;
  const double ell2 = sc.ell * sc.ell;
  const double sA2max = sc.sigma_A_max * sc.sigma_A_max;
  const double sA2min = sc.sigma_A_min * sc.sigma_A_min;
  const double sL2max = sc.sigma_L_max * sc.sigma_L_max;
  const double sL2min = sc.sigma_L_min * sc.sigma_L_min;
  const double kappa2 = sc.kappa_A * sc.kappa_A;

  ConditionReport report;
  const double c = (1.0 - g) * (1.0 - g) * (1.0 - 3.0 * b) / (2.0 * g * g);
  report.c = c;

  auto less = [&](std::string name, double supplied, double bound) {
    report.conditions.push_back({std::move(name), bound, supplied, supplied < bound});
  };
  // eta ell^2 (3 beta eta + 1) shows up in several bounds.
  const double drift = e * ell2 * (3.0 * b * e + 1.0);

  less("alpha < 1/(6 sigmaA_max^2 (1+3c))", a, 1.0 / (6.0 * sA2max * (1.0 + 3.0 * c)));
  less("alpha < 1/(3 sigmaL_max^2 (1+4c))", a, 1.0 / (3.0 * sL2max * (1.0 + 4.0 * c)));
  less("alpha < 1/(6 (1+3c))", a, 1.0 / (6.0 * (1.0 + 3.0 * c)));
  less("alpha < (2 mu - eta ell^2 (3 beta eta + 1))/(2 ell^2)", a,
       (2.0 * sc.mu - drift) / (2.0 * ell2));
  less("alpha < 2 eta (sigmaA_min^2 - 3 beta eta sigmaA_max^2)", a,
       2.0 * e * (sA2min - 3.0 * b * e * sA2max));
  less("alpha < 1 - 3 beta", a, 1.0 - 3.0 * b);

  less("beta < 1/3", b, 1.0 / 3.0);
  less("beta < (2 mu/(eta ell^2) - 1)/(3 eta)", b,
       (2.0 * sc.mu / (e * ell2) - 1.0) / (3.0 * e));
  less("beta < 1/(3 eta kappaA^2)", b, 1.0 / (3.0 * e * kappa2));

  less("eta < 2 mu/ell^2", e, 2.0 * sc.mu / ell2);

  report.conditions.push_back({"gamma > 1 - 1/(2 kappaA)", 1.0 - 1.0 / (2.0 * sc.kappa_A), g,
                               g > 1.0 - 1.0 / (2.0 * sc.kappa_A)});
  less("gamma < 1", g, 1.0);

  if (mode == ConstraintMode::kEquality) {
    less("alpha < (8 mu - 4 eta ell^2 (3 beta eta + 1) + (1 - 3 beta))/(8 ell^2)", a,
         (8.0 * sc.mu - 4.0 * drift + (1.0 - 3.0 * b)) / (8.0 * ell2));
    if (report.all_passed()) {
      const double terms[] = {
          1.0 + a * (2.0 * ell2 * a - 2.0 * sc.mu + drift + (3.0 * b - 1.0) / 4.0),
          (8.0 + a * (3.0 * b - 1.0) * sL2min) / 8.0,
          1.0 + b * e * (3.0 * b * e * sA2max - sA2min),
          0.5,
          4.0 * (1.0 - g) * (1.0 - g) * kappa2,
      };
      report.theta_prime = *std::max_element(std::begin(terms), std::end(terms));
    }
  }
  return report;
}

}  // namespace danyra

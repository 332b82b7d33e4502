#include "danyra/metrics.hpp"

#include <cmath>

#include "danyra/error.hpp"
#include "danyra/netsim.hpp"

namespace danyra {

namespace {

void check_stacked(const ProblemInstance& inst, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != inst.n() * inst.p) {
    throw DimensionError("stacked decision has " + std::to_string(x.size()) +
                         " entries, expected " + std::to_string(inst.n() * inst.p));
  }
}

Vector coupled_residual(const ProblemInstance& inst, const Vector& x) {
  check_stacked(inst, x);
  const auto p = static_cast<Eigen::Index>(inst.p);
  Vector r = Vector::Zero(static_cast<Eigen::Index>(inst.m));
  for (std::size_t i = 0; i < inst.n(); ++i) {
    r += inst.agents[i].A * x.segment(static_cast<Eigen::Index>(i) * p, p) - inst.agents[i].d;
  }
  return r;
}

}  // namespace

double violation_l1(const ProblemInstance& instance, const Vector& x_stacked) {
  return coupled_residual(instance, x_stacked).cwiseMax(0.0).sum();
}

double optimality_gap(const Vector& x_stacked, const OracleSolution& oracle) {
  if (x_stacked.size() != oracle.x_star.size()) {
    throw DimensionError("decision and oracle sizes differ");
  }
  return (x_stacked - oracle.x_star).squaredNorm();
}

Vector slack_sum(const ProblemInstance& instance, const Vector& x_stacked,
                 const Vector& delta_stacked) {
  Vector s = coupled_residual(instance, x_stacked);
  if (delta_stacked.size() == 0) return s;
  const auto m = static_cast<Eigen::Index>(instance.m);
  if (static_cast<std::size_t>(delta_stacked.size()) != instance.n() * instance.m) {
    throw DimensionError("stacked queue has wrong size");
  }
  for (std::size_t i = 0; i < instance.n(); ++i) {
    s += delta_stacked.segment(static_cast<Eigen::Index>(i) * m, m);
  }
  return s;
}

std::optional<std::size_t> recovery_iteration(const Trace& trace, std::size_t from_k,
                                              double tol) {
  // Feasible from the first recorded row on counts as feasible at from_k.
  std::optional<std::size_t> candidate;
  bool any = false;
  for (const auto& row : trace.rows) {
    if (row.k < from_k) continue;
    if (!any) {
      any = true;
      if (row.violation_l1 <= tol) candidate = from_k;
    }
    if (row.violation_l1 <= tol) {
      if (!candidate) candidate = row.k;
    } else {
      candidate.reset();
    }
  }
  return candidate;
}

BoundsReport bounds_report(const SpectralConstants& sc, const HyperParams& hp, std::size_t n,
                           double c_vio, std::size_t k0) {
  const double g = hp.gamma;
  if (!(g > 0.0 && g < 1.0)) throw InvalidHyperParams("gamma must lie in (0, 1)");
  if (!(c_vio >= 0.0)) throw InvalidHyperParams("violation magnitude must be >= 0");
  const double nd = static_cast<double>(n);
  const double rate = std::log(1.0 - g);

  BoundsReport r;
  r.c_vio = c_vio;
  const bool decaying = hp.buffer.kind() != BufferSchedule::Kind::kConstant;
  r.omega = decaying ? hp.buffer.omega(k0) : hp.buffer.constant_value();
  r.accuracy_bound = decaying ? 0.0 : sc.ell * std::sqrt(nd) * r.omega / (sc.mu * sc.sigma_A_min);
  r.one_step_threshold = nd * r.omega / (1.0 - g);
  r.one_step_absorbs = c_vio <= r.one_step_threshold;

  if (!decaying) {
    const double target = nd * r.omega;
    if (c_vio <= target) {
      r.recovery_bound_t = 0;
    } else if (target > 0.0) {
      r.recovery_bound_t = static_cast<long>(std::ceil(std::log(target / c_vio) / rate));
    }
  } else {
    for (long t = 0; t <= 10'000'000; ++t) {
      const double lhs = std::pow(1.0 - g, static_cast<double>(t + 1)) * c_vio;
      if (lhs <= nd * hp.buffer.omega(k0 + static_cast<std::size_t>(t) + 1)) {
        r.recovery_bound_t = t;
        break;
      }
    }
  }

  // The trade-off curve uses the smallest admissible t; when C <= n omega
  // the logarithm is negative and t is clamped to 0.
  if (r.recovery_bound_t) {
    r.tradeoff_t = std::max(0L, *r.recovery_bound_t);
    r.tradeoff_rhs = sc.ell * std::pow(1.0 - g, static_cast<double>(r.tradeoff_t + 1)) * c_vio /
                     (sc.mu * sc.sigma_A_min * std::sqrt(nd));
  }
  return r;
}

double lyapunov_metric(const SwarmState& state, const SwarmState& fixed_point,
                       const ProblemInstance& instance, const HyperParams& hp,
                       const SpectralConstants& sc) {
  if (state.agents.size() != fixed_point.agents.size() || state.agents.size() != instance.n()) {
    throw DimensionError("lyapunov_metric: agent count mismatch");
  }
  const auto& topo = instance.topology;
  const bool inequality = state.mode == ConstraintMode::kInequality;
  // z = A x + L y (+ delta) for the inequality metric, A x' + L y for equality.
  auto z_of = [&](const SwarmState& s, std::size_t i) {
    const auto& a = s.agents[i];
    Vector z = instance.agents[i].A * (inequality ? a.x : a.x_prime);
    for (const auto& nb : topo.neighbors[i]) z += nb.weight * (a.y - s.agents[nb.index].y);
    if (inequality) z += a.delta;
    return z;
  };
  const double weight_z = hp.alpha * (1.0 - 3.0 * hp.beta) / 2.0;
  const double weight_track = sc.sigma_A_min * sc.sigma_A_min * hp.alpha * (1.0 - 3.0 * hp.beta) /
                              (8.0 * hp.gamma * hp.gamma);
  double v = 0.0;
  for (std::size_t i = 0; i < instance.n(); ++i) {
    const auto& a = state.agents[i];
    const auto& f = fixed_point.agents[i];
    v += (a.x_prime - f.x_prime).squaredNorm() + (a.y - f.y).squaredNorm() +
         hp.alpha / hp.beta * (a.lambda - f.lambda).squaredNorm();
    if (inequality) v += (a.delta - f.delta).squaredNorm();
    v += weight_z * (z_of(state, i) - z_of(fixed_point, i)).squaredNorm();
    v += weight_track * (a.x - a.x_prime).squaredNorm();
  }
  return v;
}

}  // namespace danyra

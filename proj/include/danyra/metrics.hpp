#pragma once

#include <cstddef>
#include <optional>

#include "danyra/engine.hpp"
#include "danyra/hyperparams.hpp"
#include "danyra/oracle.hpp"
#include "danyra/problem.hpp"

namespace danyra {

struct Trace;

/// ||max(sum_i (A_i x_i - d_i), 0)||_1 for stacked x.
double violation_l1(const ProblemInstance& instance, const Vector& x_stacked);

/// ||x - x*||^2.
double optimality_gap(const Vector& x_stacked, const OracleSolution& oracle);

/// sum_i (A_i x_i + delta_i - d_i); pass an empty delta in equality mode.
Vector slack_sum(const ProblemInstance& instance, const Vector& x_stacked,
                 const Vector& delta_stacked);

/// First recorded k >= from_k whose violation is <= tol and stays so on all
/// later rows; from_k itself when every recorded row from there on is
/// feasible; nullopt when the trace never settles.
std::optional<std::size_t> recovery_iteration(const Trace& trace, std::size_t from_k,
                                              double tol = 1e-12);

struct BoundsReport {
  double omega = 0.0;
  double accuracy_bound = 0.0;            // ell sqrt(n) omega / (mu sigmaA_min)
  std::optional<long> recovery_bound_t;   // nullopt: no finite bound (omega = 0, C > 0)
  long tradeoff_t = 0;                    // smallest t from the recovery bound, clamped >= 0
  double tradeoff_rhs = 0.0;              // ell (1-gamma)^{t+1} C / (mu sigmaA_min sqrt(n))
  double one_step_threshold = 0.0;        // n omega / (1 - gamma)
  bool one_step_absorbs = false;          // C <= one_step_threshold
  double c_vio = 0.0;
};

/// Closed-form accuracy / recovery / trade-off quantities. For constant
/// buffers omega is the constant; for decaying schedules accuracy_bound is 0
/// and recovery_bound_t is the smallest t with
/// (1-gamma)^{t+1} C <= n omega_{k0+t+1}, searched up to 10^7.
/// Throws InvalidHyperParams unless 0 < gamma < 1 and C >= 0.
BoundsReport bounds_report(const SpectralConstants& sc, const HyperParams& hp, std::size_t n,
                           double c_vio, std::size_t k0 = 0);

/// Lyapunov diagnostic V_k measured against a captured fixed point. Only
/// meaningful once a long run has settled.
double lyapunov_metric(const SwarmState& state, const SwarmState& fixed_point,
                       const ProblemInstance& instance, const HyperParams& hp,
                       const SpectralConstants& sc);

}  // namespace danyra

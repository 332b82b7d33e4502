#pragma once

// Centralised ground truth for the coupled problem. The multiplier is a
// single m-vector: at the optimum the network forces consensus on it.

#include <cstdint>
#include <optional>
#include <vector>

#include "danyra/problem.hpp"

namespace danyra {

struct OracleSolution {
  Vector x_star;                    // stacked, n*p
  Vector lambda_star;               // m
  double f_star = 0.0;
  std::vector<std::size_t> active_set;  // constraint rows holding with equality
  ConstraintMode mode = ConstraintMode::kInequality;
};

struct KktResiduals {
  double stationarity = 0.0;    // max_i ||grad f_i(x_i) + A_i^T lambda||
  double primal = 0.0;          // ||max(sum A x - sum d, 0)||_inf (|.| in equality mode)
  double dual = 0.0;            // ||max(-lambda, 0)||_inf (0 in equality mode)
  double complementarity = 0.0; // |lambda^T (sum d - sum A x)|

  double max() const noexcept;
};

KktResiduals kkt_residuals(const ProblemInstance& instance, const OracleSolution& sol);

struct ActiveSetOptions {
  std::size_t max_rows = 10;
  /// Visit subsets in a shuffled order (seeded) instead of 0, 1, 2, ...
  std::optional<std::uint64_t> shuffle_seed;
  double tolerance = 1e-10;
};

/// Enumerates the 2^m active sets of the inequality-constrained quadratic
/// problem, solving the linear KKT system for each and accepting the first
/// with lambda_S >= 0 and nonnegative slack off S.
OracleSolution solve_active_set(const ProblemInstance& instance,
                                const ActiveSetOptions& options = {});

/// Single saddle-point solve with every constraint row active and free-sign
/// multiplier.
OracleSolution solve_equality(const ProblemInstance& instance);

/// Centralised projected dual ascent: lambda <- max(lambda + step g(lambda), 0)
/// with g the constraint residual at the Lagrangian minimiser (no projection
/// in equality mode). Non-positive step selects 1 / ||sum A_i H_i^{-1} A_i^T||.
/// Stops when the KKT residual is <= 1e-9; throws OracleFailure at the cap.
OracleSolution reference_projected_gradient(const ProblemInstance& instance,
                                            std::size_t iters = 200000, double step = 0.0,
                                            ConstraintMode mode = ConstraintMode::kInequality);

/// Convenience: active set for inequality mode, saddle solve for equality.
OracleSolution solve_oracle(const ProblemInstance& instance, ConstraintMode mode);

}  // namespace danyra

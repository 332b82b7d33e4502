#pragma once

// Serial reference implementation of one iteration, written against the
// stacked compact form with dense matrices:
//
//   z_k       = A x'_k + Lb y_k + delta_k
//   x'_{k+1}  = x'_k - alpha (grad f(x'_k) + A^T (z_k - d + lambda_k))
//   y_{k+1}   = y_k - alpha Lb (z_k - d + lambda_k)
//   delta_{k+1} = max(delta_k - alpha (z_k - d + lambda_k), omega_k)
//   lambda_{k+1} = lambda_k + beta (z_{k+1} - d - eta A (A^T lambda_k + grad f(x'_k)))
//   x_{k+1}   = argmin ||x - x'_{k+1}||  s.t.  A x = b_k
//
// with A = blkdiag(A_i) and Lb = L kron I_m. It shares no code with the
// agent-parallel kernel and is kept as a cross-check and benchmark baseline.

#include "danyra/engine.hpp"

namespace danyra::reference {

/// Dense operators for an instance, built once.
struct StackedOperators {
  Matrix A;        // blkdiag(A_i), nm x np
  Matrix Lb;       // L kron I_m, nm x nm
  Vector d;        // stacked demands
  Matrix pinv_A;   // A^T (A A^T)^{-1}, via an SVD pseudo-inverse
};

StackedOperators build_operators(const ProblemInstance& instance);

SwarmState iterate(const SwarmState& state, const ProblemInstance& instance,
                   const StackedOperators& ops, const HyperParams& hp);

}  // namespace danyra::reference

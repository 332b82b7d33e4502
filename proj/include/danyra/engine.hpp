#pragma once

// One synchronous iteration of the anytime-feasible primal-dual scheme
// (inequality variant) and its equality-constrained twin.
//
// Per iteration k every agent i
//   1. exchanges lambda, y       -> lambda_bar_i, y_bar_i
//   2. forms z_i = A_i x'_i + y_bar_i (+ delta_i) and exchanges z - d -> z_bar_i
//   3. updates x'_i, y_i, delta_i (inequality only)
//   4. exchanges y_{k+1}         -> y_bar_{k+1,i}
//   5. updates lambda_i
//   6. projects x'_{k+1,i} onto {x : A_i x = b_i}
//
// Within a sub-round every agent reads only the snapshot taken at the
// sub-round boundary, so agents are updated in parallel (OpenMP). Neighbour
// sums always run in ascending neighbour order, which keeps the result
// bit-identical for any thread count.

#include <cstddef>
#include <vector>

#include "danyra/hyperparams.hpp"
#include "danyra/problem.hpp"

namespace danyra {

struct AgentState {
  Vector x;
  Vector x_prime;
  Vector y;
  Vector delta;   // empty in equality mode
  Vector lambda;
  Matrix projector;  // A^T (A A^T)^{-1}, p x m

  friend bool operator==(const AgentState& a, const AgentState& b) {
    return a.x == b.x && a.x_prime == b.x_prime && a.y == b.y && a.delta == b.delta &&
           a.lambda == b.lambda;
  }
};

struct SwarmState {
  std::size_t k = 0;
  ConstraintMode mode = ConstraintMode::kInequality;
  std::vector<AgentState> agents;
};

/// Values one agent holds after the exchange sub-rounds of iteration k.
struct AgentMessages {
  Vector lambda_bar;   // sum_j w_ij (lambda_i - lambda_j)
  Vector y_bar;        // sum_j w_ij (y_i - y_j)
  Vector z;            // A_i x'_i + y_bar_i (+ delta_i)
  Vector z_bar;        // sum_j w_ij ((z_i - d_i) - (z_j - d_j))
  Vector y_bar_next;   // sum_j w_ij (y_{i,k+1} - y_{j,k+1}); filled by exchange_auxiliary
};

struct RoundMessages {
  std::vector<AgentMessages> agents;
};

/// Thread cap for agent-parallel sub-rounds; 0 or 1 runs sequentially.
struct ExecutionPolicy {
  int threads = 0;
};

enum class InitMode { kAtDemand, kZero, kCustom };

struct InitSpec {
  InitMode mode = InitMode::kAtDemand;
  std::vector<Vector> custom_x;        // kCustom: one p-vector per agent
  std::optional<Vector> offset;        // added to every x_{i,0}
  std::vector<Vector> lambda;          // optional lambda_{i,0}; empty = zeros
};

/// A^T (A A^T)^{-1}; throws NumericError when A A^T is singular.
Matrix projector_for(const Matrix& A);

/// y = 0, lambda = 0 unless given, delta = omega_0 1 (inequality),
/// x = x' from the init mode: at_demand uses x_{i,0} = projector_i d_i so
/// that A_i x_{i,0} = d_i.
SwarmState init_state(const ProblemInstance& instance, const HyperParams& hp,
                      ConstraintMode mode, const InitSpec& init = {});

/// First two exchange sub-rounds (all reads from the iteration-k snapshot).
RoundMessages exchange_primary(const SwarmState& state, const ProblemInstance& instance,
                               ExecutionPolicy policy = {});

/// Third sub-round: fills y_bar_next from the updated auxiliaries.
void exchange_auxiliary(RoundMessages& msgs, const std::vector<Vector>& y_next,
                        const Topology& topology, ExecutionPolicy policy = {});

/// x' - alpha (grad f(x') + A^T (z - d + lambda)); `grad` is grad f(x'_k).
Vector step_virtual_decision(const AgentSpec& spec, const AgentState& agent,
                             const AgentMessages& msg, const HyperParams& hp,
                             const Vector& grad);
Vector step_virtual_decision(const AgentSpec& spec, const AgentState& agent,
                             const AgentMessages& msg, const HyperParams& hp);

/// y - alpha (z_bar + lambda_bar).
Vector step_auxiliary(const AgentState& agent, const AgentMessages& msg, const HyperParams& hp);

/// max(delta - alpha (z - d + lambda), omega_k) elementwise. Throws
/// ModeError in equality mode.
Vector step_virtual_queue(const AgentSpec& spec, const AgentState& agent,
                          const AgentMessages& msg, const HyperParams& hp, double omega_k,
                          ConstraintMode mode);

/// lambda + beta (z_{k+1} - d - eta A (A^T lambda + grad f(x'_k))) where
/// z_{k+1} = A x'_{k+1} + y_bar_{k+1} (+ delta_{k+1}).
Vector step_dual(const AgentSpec& spec, const AgentState& agent, const AgentMessages& msg,
                 const HyperParams& hp, const Vector& grad_at_old_xprime,
                 const Vector& x_prime_next, const Vector& delta_next);

/// Right-hand side b_i of the decision set. Inequality:
///   A x_k - gamma (A x_k + y_bar_{k+1} + delta_{k+1} - d) + (1-gamma)(delta_k - delta_{k+1});
/// equality (delta_old/new empty): A x_k - gamma (A x_k + y_bar_{k+1} - d).
Vector projection_target(const AgentSpec& spec, const AgentState& agent,
                         const AgentMessages& msg, const HyperParams& hp,
                         const Vector& delta_old, const Vector& delta_new);

/// Closed-form Euclidean projection of x' onto {x : A x = b}:
/// x' + projector (b - A x').
Vector project_affine(const Matrix& A, const Matrix& projector, const Vector& x_prime,
                      const Vector& b);

/// project_affine(A_i, projector_i, x'_{k+1}, projection_target(...)).
Vector project_decision(const AgentSpec& spec, const AgentState& agent,
                        const AgentMessages& msg, const HyperParams& hp,
                        const Vector& delta_old, const Vector& delta_new,
                        const Vector& x_prime_next);

/// Full iteration k -> k+1. Deterministic and independent of the thread
/// count. Throws DivergenceError tagged with the lowest failing agent.
SwarmState iterate(const SwarmState& state, const ProblemInstance& instance,
                   const HyperParams& hp, ExecutionPolicy policy = {});

/// Stacked decision [x_1; ...; x_n].
Vector stacked_x(const SwarmState& state);
/// Stacked queue [delta_1; ...; delta_n] (zeros in equality mode).
Vector stacked_delta(const SwarmState& state, std::size_t m);

/// Largest absolute change of any field between two states.
double max_field_change(const SwarmState& a, const SwarmState& b);

}  // namespace danyra

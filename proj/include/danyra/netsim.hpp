#pragma once

// Synchronous experiment driver: iterates the engine, injects scheduled
// disturbances and records per-iteration metrics.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "danyra/engine.hpp"
#include "danyra/oracle.hpp"

namespace danyra {

struct DisturbanceEvent {
  std::size_t at_iteration = 1;          // applied to x_k right after iteration k produced it
  std::vector<std::size_t> agent_ids;    // empty = all agents
  Vector additive;                       // p entries
};

struct ExperimentPlan {
  const ProblemInstance* instance = nullptr;
  HyperParams hp;
  ConstraintMode mode = ConstraintMode::kInequality;
  InitSpec init;
  std::size_t iters = 1;
  std::size_t record_every = 1;
  std::vector<DisturbanceEvent> disturbances;
  bool disturb_virtual = true;   // also shift x' (false: x only)
  ExecutionPolicy policy;
};

struct TraceRow {
  std::size_t k = 0;
  std::optional<double> gap;
  double violation_l1 = 0.0;
  Vector slack_sum;
};

struct TraceMetadata {
  std::optional<std::uint64_t> seed;
  HyperParams hp;
  ConstraintMode mode = ConstraintMode::kInequality;
};

struct Trace {
  std::vector<TraceRow> rows;   // strictly increasing k
  TraceMetadata metadata;
  double seconds_per_iteration = 0.0;  // wall clock, informational
};

struct ExperimentResult {
  Trace trace;
  SwarmState final_state;
  Vector initial_slack;
};

/// x_i += additive and (unless x_only) x'_i += additive for the targeted
/// agents; y, delta and lambda are untouched. Throws ConfigError on an
/// unknown agent id and DimensionError on a size mismatch.
SwarmState apply_disturbance(const SwarmState& state, const DisturbanceEvent& event,
                             bool x_only = false);

/// Runs plan.iters iterations from init_state. Row k describes x_k after any
/// disturbance scheduled at k has been applied; rows are kept for k divisible
/// by record_every and for the final iteration. The gap column is filled
/// only when an oracle is given.
ExperimentResult run_experiment(const ExperimentPlan& plan,
                                const OracleSolution* oracle = nullptr);

/// Same as above, starting from an explicit state (plan.init is ignored).
ExperimentResult run_experiment_from(const ExperimentPlan& plan, SwarmState state,
                                     const OracleSolution* oracle = nullptr);

/// CSV with header `k,gap,violation_l1,slack_0,...,slack_{m-1}` (the gap
/// column is left out when no row carries a gap); 17 significant digits.
void write_trace_csv(std::ostream& out, const Trace& trace);

}  // namespace danyra

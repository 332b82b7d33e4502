#include "danyra/netsim.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <string>

#include "danyra/error.hpp"
#include "danyra/metrics.hpp"

namespace danyra {

namespace {

TraceRow measure(const ProblemInstance& inst, const SwarmState& state,
                 const OracleSolution* oracle) {
  TraceRow row;
  row.k = state.k;
  const Vector x = stacked_x(state);
  if (oracle) row.gap = optimality_gap(x, *oracle);
  row.violation_l1 = violation_l1(inst, x);
  const Vector delta =
      state.mode == ConstraintMode::kInequality ? stacked_delta(state, inst.m) : Vector();
  row.slack_sum = slack_sum(inst, x, delta);
  return row;
}

void check_plan(const ExperimentPlan& plan) {
  if (plan.instance == nullptr) throw ConfigError("experiment plan has no instance");
  if (plan.iters < 1) throw ConfigError("iters must be >= 1");
  if (plan.record_every < 1) throw ConfigError("record_every must be >= 1");
  for (const auto& ev : plan.disturbances) {
    if (ev.at_iteration < 1) throw ConfigError("disturbance at_iteration must be >= 1");
    if (ev.at_iteration > plan.iters) {
      throw ConfigError("disturbance at iteration " + std::to_string(ev.at_iteration) +
                        " is beyond iters = " + std::to_string(plan.iters));
    }
    if (!ev.additive.allFinite()) throw ConfigError("disturbance vector is not finite");
  }
}

}  // namespace

SwarmState apply_disturbance(const SwarmState& state, const DisturbanceEvent& event,
                             bool x_only) {
  SwarmState out = state;
  auto hit = [&](std::size_t i) {
    auto& a = out.agents[i];
    if (event.additive.size() != a.x.size()) {
      throw DimensionError("disturbance has " + std::to_string(event.additive.size()) +
                           " entries, decision has " + std::to_string(a.x.size()));
    }
    a.x += event.additive;
    if (!x_only) a.x_prime += event.additive;
  };
  if (event.agent_ids.empty()) {
    for (std::size_t i = 0; i < out.agents.size(); ++i) hit(i);
  } else {
    for (std::size_t id : event.agent_ids) {
      if (id >= out.agents.size()) {
        throw ConfigError("disturbance targets unknown agent " + std::to_string(id));
      }
      hit(id);
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const OracleSolution* oracle) {
  check_plan(plan);
  return run_experiment_from(plan, init_state(*plan.instance, plan.hp, plan.mode, plan.init),
                             oracle);
}

ExperimentResult run_experiment_from(const ExperimentPlan& plan, SwarmState state,
                                     const OracleSolution* oracle) {
  check_plan(plan);
  const auto& inst = *plan.instance;
  ExperimentResult result;
  result.trace.metadata.hp = plan.hp;
  result.trace.metadata.mode = state.mode;
  result.initial_slack = measure(inst, state, nullptr).slack_sum;

  const auto start = std::chrono::steady_clock::now();
  const std::size_t last = state.k + plan.iters;
  while (state.k < last) {
    state = iterate(state, inst, plan.hp, plan.policy);
    for (const auto& ev : plan.disturbances) {
      if (ev.at_iteration == state.k) state = apply_disturbance(state, ev, !plan.disturb_virtual);
    }
    if (state.k % plan.record_every == 0 || state.k == last) {
      result.trace.rows.push_back(measure(inst, state, oracle));
    }
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  result.trace.seconds_per_iteration = elapsed.count() / static_cast<double>(plan.iters);
  result.final_state = std::move(state);
  return result;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  const bool with_gap =
      !trace.rows.empty() && std::all_of(trace.rows.begin(), trace.rows.end(),
                                         [](const TraceRow& r) { return r.gap.has_value(); });
  const Eigen::Index m = trace.rows.empty() ? 0 : trace.rows.front().slack_sum.size();
  out << "k";
  if (with_gap) out << ",gap";
  out << ",violation_l1";
  for (Eigen::Index j = 0; j < m; ++j) out << ",slack_" << j;
  out << '\n';
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const auto& row : trace.rows) {
    out << row.k;
    if (with_gap) out << ',' << *row.gap;
    out << ',' << row.violation_l1;
    for (Eigen::Index j = 0; j < m; ++j) out << ',' << row.slack_sum(j);
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace danyra

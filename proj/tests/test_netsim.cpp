#include <sstream>

#include <gtest/gtest.h>

#include "danyra/error.hpp"
#include "danyra/metrics.hpp"
#include "danyra/netsim.hpp"
#include "fixtures.hpp"

namespace {

using danyra::BufferSchedule;
using danyra::DisturbanceEvent;
using danyra::ExperimentPlan;
using danyra::HyperParams;
using danyra::Vector;
using fixtures::vec;

const danyra::ProblemInstance& base_instance() {
  static const auto inst = danyra::generate_instance(1, 14, 70.0, 5);
  return inst;
}

ExperimentPlan base_plan(std::size_t iters) {
  ExperimentPlan plan;
  plan.instance = &base_instance();
  plan.hp = HyperParams{0.01, 0.02, 0.1, 0.2, BufferSchedule::constant(0.0)};
  plan.iters = iters;
  return plan;
}

TEST(Experiment, UndisturbedRunStaysFeasible) {
  const auto r = danyra::run_experiment(base_plan(300));
  ASSERT_EQ(r.trace.rows.size(), 300u);
  for (const auto& row : r.trace.rows) EXPECT_LE(row.violation_l1, 1e-12) << row.k;
  EXPECT_FALSE(r.trace.rows.front().gap.has_value());
}

TEST(Experiment, DisturbanceJumpsThenDecays) {
  auto plan = base_plan(600);
  plan.disturbances.push_back({500, {}, vec({50, 50})});
  const auto r = danyra::run_experiment(plan);
  const auto& rows = r.trace.rows;
  EXPECT_LE(rows[498].violation_l1, 1e-12);
  EXPECT_EQ(rows[499].k, 500u);
  EXPECT_GT(rows[499].violation_l1, 700.0);
  for (std::size_t i = 500; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].violation_l1, rows[i - 1].violation_l1 + 1e-9);
  }
  EXPECT_LT(rows.back().violation_l1, 1e-6 * rows[499].violation_l1);
}

TEST(Experiment, SlackRecursionAfterDisturbance) {
  auto plan = base_plan(560);
  plan.hp.buffer = BufferSchedule::constant(0.1);
  plan.disturbances.push_back({500, {}, vec({50, 50})});
  const auto r = danyra::run_experiment(plan);
  const auto& rows = r.trace.rows;
  for (std::size_t i = 500; i < rows.size(); ++i) {
    const Vector expect = 0.8 * rows[i - 1].slack_sum;
    EXPECT_LE((rows[i].slack_sum - expect).norm(), 1e-9 * (1.0 + expect.norm())) << rows[i].k;
  }
}

TEST(Experiment, SingleIterationGivesOneRow) {
  const auto r = danyra::run_experiment(base_plan(1));
  ASSERT_EQ(r.trace.rows.size(), 1u);
  EXPECT_EQ(r.trace.rows[0].k, 1u);
  EXPECT_EQ(r.final_state.k, 1u);
}

TEST(Experiment, RecordEveryKeepsFinalRow) {
  auto plan = base_plan(25);
  plan.record_every = 10;
  const auto r = danyra::run_experiment(plan);
  std::vector<std::size_t> ks;
  for (const auto& row : r.trace.rows) ks.push_back(row.k);
  EXPECT_EQ(ks, (std::vector<std::size_t>{10, 20, 25}));
}

TEST(Experiment, OracleFillsGapColumn) {
  const auto sol = danyra::solve_oracle(base_instance(), danyra::ConstraintMode::kInequality);
  const auto r = danyra::run_experiment(base_plan(5), &sol);
  for (const auto& row : r.trace.rows) ASSERT_TRUE(row.gap.has_value());
  EXPECT_NEAR(*r.trace.rows.back().gap, danyra::optimality_gap(danyra::stacked_x(r.final_state), sol),
              1e-12);
}

TEST(Experiment, DisturbanceBeyondHorizonRejected) {
  auto plan = base_plan(10);
  plan.disturbances.push_back({11, {}, vec({1, 1})});
  EXPECT_THROW(danyra::run_experiment(plan), danyra::ConfigError);
  plan.disturbances[0].at_iteration = 0;
  EXPECT_THROW(danyra::run_experiment(plan), danyra::ConfigError);
}

TEST(Experiment, Reproducible) {
  auto plan = base_plan(200);
  plan.disturbances.push_back({50, {0, 3}, vec({5, -2})});
  const auto a = danyra::run_experiment(plan);
  const auto b = danyra::run_experiment(plan);
  EXPECT_TRUE(a.final_state.agents == b.final_state.agents);
  std::ostringstream sa, sb;
  danyra::write_trace_csv(sa, a.trace);
  danyra::write_trace_csv(sb, b.trace);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Disturbance, ZeroShiftIsNoOp) {
  const auto& inst = base_instance();
  const auto s = danyra::init_state(inst, base_plan(1).hp, danyra::ConstraintMode::kInequality);
  const auto t = danyra::apply_disturbance(s, {1, {}, Vector::Zero(2)});
  EXPECT_TRUE(s.agents == t.agents);
}

TEST(Disturbance, SlackJumpsBySummedImage) {
  const auto& inst = base_instance();
  const auto s = danyra::init_state(inst, base_plan(1).hp, danyra::ConstraintMode::kInequality);
  const auto t = danyra::apply_disturbance(s, {1, {}, vec({50, 50})});
  Vector jump = Vector::Zero(2);
  for (const auto& a : inst.agents) jump += a.A * vec({50, 50});
  const Vector before = danyra::slack_sum(inst, danyra::stacked_x(s), danyra::stacked_delta(s, 2));
  const Vector after = danyra::slack_sum(inst, danyra::stacked_x(t), danyra::stacked_delta(t, 2));
  EXPECT_LE((after - before - jump).norm(), 1e-10);
  for (std::size_t i = 0; i < inst.n(); ++i) {
    EXPECT_EQ(t.agents[i].x_prime, s.agents[i].x_prime + vec({50, 50}));
    EXPECT_EQ(t.agents[i].y, s.agents[i].y);
    EXPECT_EQ(t.agents[i].delta, s.agents[i].delta);
    EXPECT_EQ(t.agents[i].lambda, s.agents[i].lambda);
  }
}

TEST(Disturbance, TargetsOnlyListedAgentsAndXOnly) {
  const auto& inst = base_instance();
  const auto s = danyra::init_state(inst, base_plan(1).hp, danyra::ConstraintMode::kInequality);
  const auto t = danyra::apply_disturbance(s, {1, {4}, vec({1, 2})}, true);
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const Vector shift = i == 4 ? vec({1, 2}) : Vector::Zero(2);
    EXPECT_EQ(t.agents[i].x, s.agents[i].x + shift);
    EXPECT_EQ(t.agents[i].x_prime, s.agents[i].x_prime);
  }
}

TEST(Disturbance, BadEventsRejected) {
  const auto& inst = base_instance();
  const auto s = danyra::init_state(inst, base_plan(1).hp, danyra::ConstraintMode::kInequality);
  EXPECT_THROW(danyra::apply_disturbance(s, {1, {14}, vec({1, 1})}), danyra::ConfigError);
  EXPECT_THROW(danyra::apply_disturbance(s, {1, {}, vec({1, 1, 1})}), danyra::DimensionError);
}

TEST(TraceCsv, HeaderAndPrecision) {
  danyra::Trace t;
  danyra::TraceRow row;
  row.k = 3;
  row.violation_l1 = 0.1;
  row.slack_sum = vec({1.0 / 3.0, -2.0});
  t.rows.push_back(row);
  std::ostringstream os;
  danyra::write_trace_csv(os, t);
  EXPECT_EQ(os.str(), "k,violation_l1,slack_0,slack_1\n3,0.10000000000000001,0.33333333333333331,-2\n");

  t.rows[0].gap = 0.5;
  std::ostringstream with_gap;
  danyra::write_trace_csv(with_gap, t);
  EXPECT_EQ(with_gap.str().substr(0, with_gap.str().find('\n')), "k,gap,violation_l1,slack_0,slack_1");
}

}  // namespace

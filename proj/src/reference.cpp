#include "danyra/reference.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include "danyra/error.hpp"

namespace danyra::reference {

namespace {

Vector stack(const std::vector<AgentState>& agents, Vector AgentState::*field,
             Eigen::Index width) {
  Vector out = Vector::Zero(width * static_cast<Eigen::Index>(agents.size()));
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Vector& v = agents[i].*field;
    if (v.size() == width) out.segment(static_cast<Eigen::Index>(i) * width, width) = v;
  }
  return out;
}

void unstack(std::vector<AgentState>& agents, Vector AgentState::*field, const Vector& v,
             Eigen::Index width) {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].*field = v.segment(static_cast<Eigen::Index>(i) * width, width);
  }
}

}  // namespace

StackedOperators build_operators(const ProblemInstance& instance) {
  validate_instance(instance);
  const auto n = static_cast<Eigen::Index>(instance.n());
  const auto p = static_cast<Eigen::Index>(instance.p);
  const auto m = static_cast<Eigen::Index>(instance.m);
  StackedOperators ops;
  ops.A = Matrix::Zero(n * m, n * p);
  ops.d = Vector(n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    ops.A.block(i * m, i * p, m, p) = instance.agents[static_cast<std::size_t>(i)].A;
    ops.d.segment(i * m, m) = instance.agents[static_cast<std::size_t>(i)].d;
  }
  ops.Lb = Eigen::kroneckerProduct(instance.topology.L, Matrix::Identity(m, m));
  ops.pinv_A = ops.A.completeOrthogonalDecomposition().pseudoInverse();
  return ops;
}

SwarmState iterate(const SwarmState& state, const ProblemInstance& instance,
                   const StackedOperators& ops, const HyperParams& hp) {
  const auto n = static_cast<Eigen::Index>(instance.n());
  const auto p = static_cast<Eigen::Index>(instance.p);
  const auto m = static_cast<Eigen::Index>(instance.m);
  const bool inequality = state.mode == ConstraintMode::kInequality;

  const Vector x = stack(state.agents, &AgentState::x, p);
  const Vector xp = stack(state.agents, &AgentState::x_prime, p);
  const Vector y = stack(state.agents, &AgentState::y, m);
  const Vector delta = stack(state.agents, &AgentState::delta, m);
  const Vector lambda = stack(state.agents, &AgentState::lambda, m);

  Vector grad(n * p);
  for (Eigen::Index i = 0; i < n; ++i) {
    grad.segment(i * p, p) =
        cost_gradient(instance.agents[static_cast<std::size_t>(i)], xp.segment(i * p, p));
  }

  const Vector z = ops.A * xp + ops.Lb * y + delta;
  const Vector drive = z - ops.d + lambda;
  const Vector xp_next = xp - hp.alpha * (grad + ops.A.transpose() * drive);
  const Vector y_next = y - hp.alpha * (ops.Lb * drive);
  Vector delta_next = Vector::Zero(n * m);
  if (inequality) {
    delta_next = (delta - hp.alpha * drive).cwiseMax(hp.buffer.omega(state.k));
  }
  const Vector z_next = ops.A * xp_next + ops.Lb * y_next + delta_next;
  const Vector lambda_next =
      lambda + hp.beta * (z_next - ops.d - hp.eta * (ops.A * (ops.A.transpose() * lambda + grad)));

  const Vector Ax = ops.A * x;
  Vector b = Ax - hp.gamma * (Ax + ops.Lb * y_next + delta_next - ops.d);
  if (inequality) b += (1.0 - hp.gamma) * (delta - delta_next);
  const Vector x_next = xp_next + ops.pinv_A * (b - ops.A * xp_next);

  if (!x_next.allFinite() || !lambda_next.allFinite()) {
    throw DivergenceError("reference iterate", state.k);
  }

  SwarmState next = state;
  next.k = state.k + 1;
  unstack(next.agents, &AgentState::x, x_next, p);
  unstack(next.agents, &AgentState::x_prime, xp_next, p);
  unstack(next.agents, &AgentState::y, y_next, m);
  unstack(next.agents, &AgentState::lambda, lambda_next, m);
  if (inequality) unstack(next.agents, &AgentState::delta, delta_next, m);
  return next;
}

}  // namespace danyra::reference

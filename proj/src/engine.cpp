#include "danyra/engine.hpp"

#include <algorithm>
#include <exception>
#include <string>

#include "danyra/error.hpp"

namespace danyra {

namespace {

// Runs fn(i) for every agent, in parallel when policy.threads > 1.
// Exceptions cannot cross an OpenMP region, so each agent's exception is
// parked and the one from the lowest agent index is rethrown afterwards.
template <class Fn>
void for_each_agent(std::size_t n, ExecutionPolicy policy, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
  const int threads = std::max(policy.threads, 1);
#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
  for (long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// sum_j w_ij (v_i - v_j) in ascending neighbour order.
template <class Get>
Vector laplacian_row(const Topology& topo, std::size_t i, Get&& get) {
  const Vector& vi = get(i);
  Vector acc = Vector::Zero(vi.size());
  for (const auto& nb : topo.neighbors[i]) acc += nb.weight * (vi - get(nb.index));
  return acc;
}

void require_finite(const Vector& v, const char* field) {
  if (!v.allFinite()) throw DivergenceError(field);
}

void check_state(const SwarmState& state, const ProblemInstance& instance) {
  if (state.agents.size() != instance.n()) {
    throw DimensionError("state has " + std::to_string(state.agents.size()) +
                         " agents, instance has " + std::to_string(instance.n()));
  }
}

}  // namespace

Matrix projector_for(const Matrix& A) {
  const Matrix gram = A * A.transpose();
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 0.0) {
    throw NumericError("A A^T is singular");
  }
  const Matrix P = A.transpose() * ldlt.solve(Matrix::Identity(A.rows(), A.rows()));
  if (!P.allFinite()) throw NumericError("projector is not finite");
  return P;
}

SwarmState init_state(const ProblemInstance& instance, const HyperParams& hp,
                      ConstraintMode mode, const InitSpec& init) {
  validate_instance(instance);
  validate(hp);
  const auto p = static_cast<Eigen::Index>(instance.p);
  const auto m = static_cast<Eigen::Index>(instance.m);
  if (init.mode == InitMode::kCustom && init.custom_x.size() != instance.n()) {
    throw DimensionError("custom x0 has " + std::to_string(init.custom_x.size()) +
                         " entries for " + std::to_string(instance.n()) + " agents");
  }
  if (init.offset && init.offset->size() != p) {
    throw DimensionError("x0 offset must have p entries");
  }
  if (!init.lambda.empty() && init.lambda.size() != instance.n()) {
    throw DimensionError("lambda0 must have one entry per agent");
  }

  SwarmState state;
  state.k = 0;
  state.mode = mode;
  state.agents.reserve(instance.n());
  const double omega0 = std::max(0.0, hp.buffer.omega(0));
  for (std::size_t i = 0; i < instance.n(); ++i) {
    const auto& spec = instance.agents[i];
    AgentState a;
    a.projector = projector_for(spec.A);
    switch (init.mode) {
      case InitMode::kAtDemand:
        a.x = a.projector * spec.d;
        break;
      case InitMode::kZero:
        a.x = Vector::Zero(p);
        break;
      case InitMode::kCustom:
        if (init.custom_x[i].size() != p) {
          throw DimensionError("custom x0 for agent " + std::to_string(i) + " has " +
                               std::to_string(init.custom_x[i].size()) + " entries, expected " +
                               std::to_string(p));
        }
        a.x = init.custom_x[i];
        break;
    }
    if (init.offset) a.x += *init.offset;
    a.x_prime = a.x;
    a.y = Vector::Zero(m);
    if (mode == ConstraintMode::kInequality) a.delta = Vector::Constant(m, omega0);
    if (init.lambda.empty()) {
      a.lambda = Vector::Zero(m);
    } else {
      if (init.lambda[i].size() != m) throw DimensionError("lambda0 must have m entries");
      a.lambda = init.lambda[i];
    }
    state.agents.push_back(std::move(a));
  }
  return state;
}

RoundMessages exchange_primary(const SwarmState& state, const ProblemInstance& instance,
                               ExecutionPolicy policy) {
  check_state(state, instance);
  const auto& topo = instance.topology;
  const std::size_t n = instance.n();
  RoundMessages msgs;
  msgs.agents.resize(n);

  // Sub-round 1: {lambda, y}.
  for_each_agent(n, policy, [&](std::size_t i) {
    auto& msg = msgs.agents[i];
    msg.lambda_bar = laplacian_row(topo, i, [&](std::size_t j) -> const Vector& {
      return state.agents[j].lambda;
    });
    msg.y_bar = laplacian_row(topo, i, [&](std::size_t j) -> const Vector& {
      return state.agents[j].y;
    });
    const auto& a = state.agents[i];
    msg.z = instance.agents[i].A * a.x_prime + msg.y_bar;
    if (state.mode == ConstraintMode::kInequality) msg.z += a.delta;
  });

  // Sub-round 2: {z - d}.
  std::vector<Vector> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = msgs.agents[i].z - instance.agents[i].d;
  for_each_agent(n, policy, [&](std::size_t i) {
    msgs.agents[i].z_bar =
        laplacian_row(topo, i, [&](std::size_t j) -> const Vector& { return residual[j]; });
  });
  return msgs;
}

void exchange_auxiliary(RoundMessages& msgs, const std::vector<Vector>& y_next,
                        const Topology& topology, ExecutionPolicy policy) {
  if (y_next.size() != msgs.agents.size() || y_next.size() != topology.n) {
    throw DimensionError("exchange_auxiliary: agent count mismatch");
  }
  for_each_agent(topology.n, policy, [&](std::size_t i) {
    msgs.agents[i].y_bar_next =
        laplacian_row(topology, i, [&](std::size_t j) -> const Vector& { return y_next[j]; });
  });
}

Vector step_virtual_decision(const AgentSpec& spec, const AgentState& agent,
                             const AgentMessages& msg, const HyperParams& hp,
                             const Vector& grad) {
  Vector next =
      agent.x_prime - hp.alpha * (grad + spec.A.transpose() * (msg.z - spec.d + agent.lambda));
  require_finite(next, "x_prime");
  return next;
}

Vector step_virtual_decision(const AgentSpec& spec, const AgentState& agent,
                             const AgentMessages& msg, const HyperParams& hp) {
  return step_virtual_decision(spec, agent, msg, hp, cost_gradient(spec, agent.x_prime));
}

Vector step_auxiliary(const AgentState& agent, const AgentMessages& msg, const HyperParams& hp) {
  Vector next = agent.y - hp.alpha * (msg.z_bar + msg.lambda_bar);
  require_finite(next, "y");
  return next;
}

Vector step_virtual_queue(const AgentSpec& spec, const AgentState& agent,
                          const AgentMessages& msg, const HyperParams& hp, double omega_k,
                          ConstraintMode mode) {
  if (mode != ConstraintMode::kInequality) {
    throw ModeError("virtual queue update only exists for the inequality constraint");
  }
  Vector next = (agent.delta - hp.alpha * (msg.z - spec.d + agent.lambda)).cwiseMax(omega_k);
  require_finite(next, "delta");
  return next;
}

Vector step_dual(const AgentSpec& spec, const AgentState& agent, const AgentMessages& msg,
                 const HyperParams& hp, const Vector& grad_at_old_xprime,
                 const Vector& x_prime_next, const Vector& delta_next) {
  Vector z_next = spec.A * x_prime_next + msg.y_bar_next;
  if (delta_next.size() != 0) z_next += delta_next;
  Vector next = agent.lambda +
                hp.beta * (z_next - spec.d -
                           hp.eta * (spec.A * (spec.A.transpose() * agent.lambda +
                                               grad_at_old_xprime)));
  require_finite(next, "lambda");
  return next;
}

Vector projection_target(const AgentSpec& spec, const AgentState& agent,
                         const AgentMessages& msg, const HyperParams& hp,
                         const Vector& delta_old, const Vector& delta_new) {
  const Vector Ax = spec.A * agent.x;
  if (delta_new.size() == 0) {
    return Ax - hp.gamma * (Ax + msg.y_bar_next - spec.d);
  }
  return Ax - hp.gamma * (Ax + msg.y_bar_next + delta_new - spec.d) +
         (1.0 - hp.gamma) * (delta_old - delta_new);
}

Vector project_affine(const Matrix& A, const Matrix& projector, const Vector& x_prime,
                      const Vector& b) {
  return x_prime + projector * (b - A * x_prime);
}

Vector project_decision(const AgentSpec& spec, const AgentState& agent,
                        const AgentMessages& msg, const HyperParams& hp,
                        const Vector& delta_old, const Vector& delta_new,
                        const Vector& x_prime_next) {
  const Vector b = projection_target(spec, agent, msg, hp, delta_old, delta_new);
  Vector next = project_affine(spec.A, agent.projector, x_prime_next, b);
  require_finite(next, "x");
  return next;
}

SwarmState iterate(const SwarmState& state, const ProblemInstance& instance,
                   const HyperParams& hp, ExecutionPolicy policy) {
  check_state(state, instance);
  const std::size_t n = instance.n();
  const bool inequality = state.mode == ConstraintMode::kInequality;
  const double omega_k = hp.buffer.omega(state.k);

  SwarmState next;
  next.k = state.k + 1;
  next.mode = state.mode;
  next.agents.resize(n);
  std::vector<Vector> grads(n);
  std::vector<Vector> y_next(n);

  // Re-tags divergence with the iteration index and agent.
  auto run = [&](auto&& phase) {
    for_each_agent(n, policy, [&](std::size_t i) {
      try {
        phase(i);
      } catch (const DivergenceError& e) {
        throw DivergenceError(e.field(), state.k, i);
      }
    });
  };

  RoundMessages msgs = exchange_primary(state, instance, policy);

  run([&](std::size_t i) {
    const auto& spec = instance.agents[i];
    const auto& a = state.agents[i];
    auto& out = next.agents[i];
    grads[i] = cost_gradient(spec, a.x_prime);
    if (!grads[i].allFinite()) throw DivergenceError("gradient");
    out.x_prime = step_virtual_decision(spec, a, msgs.agents[i], hp, grads[i]);
    y_next[i] = step_auxiliary(a, msgs.agents[i], hp);
    if (inequality) {
      out.delta = step_virtual_queue(spec, a, msgs.agents[i], hp, omega_k, state.mode);
    }
  });

  exchange_auxiliary(msgs, y_next, instance.topology, policy);

  run([&](std::size_t i) {
    const auto& spec = instance.agents[i];
    const auto& a = state.agents[i];
    auto& out = next.agents[i];
    out.lambda = step_dual(spec, a, msgs.agents[i], hp, grads[i], out.x_prime, out.delta);
    out.x = project_decision(spec, a, msgs.agents[i], hp, a.delta, out.delta, out.x_prime);
    out.y = std::move(y_next[i]);
    out.projector = a.projector;
  });
  return next;
}

Vector stacked_x(const SwarmState& state) {
  if (state.agents.empty()) return {};
  const auto p = state.agents.front().x.size();
  Vector out(p * static_cast<Eigen::Index>(state.agents.size()));
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    out.segment(static_cast<Eigen::Index>(i) * p, p) = state.agents[i].x;
  }
  return out;
}

Vector stacked_delta(const SwarmState& state, std::size_t m) {
  const auto mm = static_cast<Eigen::Index>(m);
  Vector out = Vector::Zero(mm * static_cast<Eigen::Index>(state.agents.size()));
  if (state.mode == ConstraintMode::kEquality) return out;
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    out.segment(static_cast<Eigen::Index>(i) * mm, mm) = state.agents[i].delta;
  }
  return out;
}

double max_field_change(const SwarmState& a, const SwarmState& b) {
  if (a.agents.size() != b.agents.size()) throw DimensionError("state sizes differ");
  double worst = 0.0;
  auto diff = [&](const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw DimensionError("field sizes differ");
    if (u.size() > 0) worst = std::max(worst, (u - v).lpNorm<Eigen::Infinity>());
  };
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    diff(a.agents[i].x, b.agents[i].x);
    diff(a.agents[i].x_prime, b.agents[i].x_prime);
    diff(a.agents[i].y, b.agents[i].y);
    diff(a.agents[i].delta, b.agents[i].delta);
    diff(a.agents[i].lambda, b.agents[i].lambda);
  }
  return worst;
}

}  // namespace danyra

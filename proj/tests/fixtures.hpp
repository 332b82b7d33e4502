#pragma once

#include <initializer_list>
#include <vector>

#include "danyra/problem.hpp"

namespace fixtures {

using danyra::Matrix;
using danyra::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline danyra::AgentSpec agent(const Matrix& P, const Vector& Q, const Matrix& A, const Vector& d) {
  return danyra::AgentSpec{danyra::QuadraticCost(P, Q), A, d, std::nullopt};
}

inline danyra::ProblemInstance instance(std::vector<danyra::AgentSpec> agents,
                                        std::vector<danyra::Edge> edges = {}) {
  danyra::ProblemInstance inst;
  const std::size_t n = agents.size();
  inst.p = agents.front().p();
  inst.m = agents.front().m();
  inst.agents = std::move(agents);
  if (edges.empty() && n > 1) edges = danyra::ring_edges(n);
  inst.topology = danyra::metropolis_weights(n, edges);
  danyra::validate_instance(inst);
  return inst;
}

// f(x) = a x^2 - q x subject to x <= d, one agent.
inline danyra::ProblemInstance scalar_instance(double a, double q, double d) {
  Matrix P(1, 1);
  P << a;
  Matrix A(1, 1);
  A << 1.0;
  return instance({agent(P, vec({q}), A, vec({d}))});
}

}  // namespace fixtures

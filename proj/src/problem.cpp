#include "danyra/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <set>
#include <string>

#include "danyra/error.hpp"

namespace danyra {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kRankTol = 1e-10;
constexpr double kStochasticTol = 1e-12;

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

std::size_t cost_dim(const Cost& cost) {
  return std::visit(
      [](const auto& c) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, QuadraticCost>) {
          return c.dim();
        } else {
          return c.dim;
        }
      },
      cost);
}

bool is_connected(std::size_t n, const std::vector<std::vector<Neighbor>>& nbrs) {
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (const auto& nb : nbrs[u]) {
      if (!seen[nb.index]) {
        seen[nb.index] = true;
        ++count;
        frontier.push(nb.index);
      }
    }
  }
  return count == n;
}

std::vector<Edge> normalize_edges(std::size_t n, const std::vector<Edge>& edges) {
  std::set<Edge> unique;
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n) {
      throw TopologyError("edge {" + std::to_string(e.i) + "," + std::to_string(e.j) +
                          "} out of range for n=" + std::to_string(n));
    }
    if (e.i == e.j) throw TopologyError("self loop at " + std::to_string(e.i));
    unique.insert(Edge{std::min(e.i, e.j), std::max(e.i, e.j)});
  }
  return {unique.begin(), unique.end()};
}

// Fills neighbours, W, L from edges + weights and checks the doubly
// stochastic / connectivity invariants.
Topology assemble(std::size_t n, std::vector<Edge> edges, const std::vector<double>& w) {
  Topology topo;
  topo.n = n;
  topo.edges = std::move(edges);
  topo.neighbors.assign(n, {});
  topo.W = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    const auto [i, j] = topo.edges[e];
    if (!(w[e] > 0.0) || !std::isfinite(w[e])) {
      throw TopologyError("edge weight must be positive and finite");
    }
    topo.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w[e];
    topo.W(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = w[e];
    topo.neighbors[i].push_back({j, w[e]});
    topo.neighbors[j].push_back({i, w[e]});
  }
  for (auto& list : topo.neighbors) {
    std::sort(list.begin(), list.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
  }
  if (!is_connected(n, topo.neighbors)) throw TopologyError("graph is disconnected");

  topo.L = -topo.W;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double off = 0.0;
    for (const auto& nb : topo.neighbors[i]) off += nb.weight;
    topo.W(ii, ii) = 1.0 - off;
    topo.L(ii, ii) = off;
  }
  if (topo.W.diagonal().minCoeff() < -kStochasticTol) {
    throw TopologyError("weights are not nonnegative (row weight sum exceeds 1)");
  }
  const Vector ones = Vector::Ones(static_cast<Eigen::Index>(n));
  if ((topo.W * ones - ones).lpNorm<Eigen::Infinity>() > kStochasticTol ||
      (topo.W.transpose() * ones - ones).lpNorm<Eigen::Infinity>() > kStochasticTol) {
    throw TopologyError("weight matrix is not doubly stochastic");
  }
  return topo;
}

}  // namespace

QuadraticCost::QuadraticCost(Matrix P, Vector Q) : P_(std::move(P)), Q_(std::move(Q)) {
  if (P_.rows() != P_.cols() || P_.rows() != Q_.size() || Q_.size() == 0) {
    throw InvalidInstance("quadratic cost P is " + dims(P_.rows(), P_.cols()) +
                          ", Q has " + std::to_string(Q_.size()) + " entries");
  }
  if ((P_ - P_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw InvalidInstance("quadratic cost P is not symmetric");
  }
  if (!P_.allFinite() || !Q_.allFinite()) throw InvalidInstance("non-finite cost data");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(P_, Eigen::EigenvaluesOnly);
  eig_min_ = eig.eigenvalues().minCoeff();
  eig_max_ = eig.eigenvalues().maxCoeff();
  if (!(eig_min_ > 0.0)) throw InvalidInstance("quadratic cost P is not positive definite");
}

double cost_value(const AgentSpec& spec, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != cost_dim(spec.cost)) {
    throw DimensionError("cost_value expects " + std::to_string(cost_dim(spec.cost)) +
                         " entries, got " + std::to_string(x.size()));
  }
  if (const auto* q = spec.quadratic()) return q->value(x);
  return std::get<GenericCost>(spec.cost).value(x);
}

Vector cost_gradient(const AgentSpec& spec, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != cost_dim(spec.cost)) {
    throw DimensionError("cost_gradient expects " + std::to_string(cost_dim(spec.cost)) +
                         " entries, got " + std::to_string(x.size()));
  }
  if (const auto* q = spec.quadratic()) return q->gradient(x);
  return std::get<GenericCost>(spec.cost).gradient(x);
}

void validate_agent(const AgentSpec& spec) {
  const auto m = spec.A.rows();
  const auto p = spec.A.cols();
  if (m == 0 || p < m) {
    throw InvalidInstance("coupling matrix must be m x p with p >= m >= 1, got " + dims(m, p));
  }
  if (spec.d.size() != m) {
    throw InvalidInstance("demand has " + std::to_string(spec.d.size()) +
                          " entries, coupling matrix has " + std::to_string(m) + " rows");
  }
  if (cost_dim(spec.cost) != static_cast<std::size_t>(p)) {
    throw InvalidInstance("cost dimension differs from coupling matrix columns");
  }
  if (const auto* g = std::get_if<GenericCost>(&spec.cost); g && (!g->value || !g->gradient)) {
    throw InvalidInstance("generic cost needs both value and gradient");
  }
  if (!spec.A.allFinite() || !spec.d.allFinite()) throw InvalidInstance("non-finite A or d");
  Eigen::JacobiSVD<Matrix> svd(spec.A);
  if (!(svd.singularValues().minCoeff() > kRankTol)) {
    throw InvalidInstance("coupling matrix does not have full row rank");
  }
}

std::vector<double> Topology::edge_weights() const {
  std::vector<double> w;
  w.reserve(edges.size());
  for (const auto& e : edges) {
    w.push_back(W(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)));
  }
  return w;
}

Topology metropolis_weights(std::size_t n, const std::vector<Edge>& edges) {
  if (n == 0) throw TopologyError("empty graph");
  auto unique = normalize_edges(n, edges);
  std::vector<std::size_t> degree(n, 0);
  for (const auto& e : unique) {
    ++degree[e.i];
    ++degree[e.j];
  }
  std::vector<double> w;
  w.reserve(unique.size());
  for (const auto& e : unique) {
    w.push_back(1.0 / (1.0 + static_cast<double>(std::max(degree[e.i], degree[e.j]))));
  }
  return assemble(n, std::move(unique), w);
}

Topology topology_from_weights(std::size_t n, const std::vector<Edge>& edges,
                               const std::vector<double>& weights) {
  if (edges.size() != weights.size()) {
    throw TopologyError("edges and weights have different lengths");
  }
  if (n == 0) throw TopologyError("empty graph");
  // Sort edges together with their weights, rejecting duplicates.
  std::vector<std::pair<Edge, double>> pairs;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [i, j] = edges[e];
    if (i >= n || j >= n) throw TopologyError("edge out of range");
    if (i == j) throw TopologyError("self loop at " + std::to_string(i));
    pairs.push_back({Edge{std::min(i, j), std::max(i, j)}, weights[e]});
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Edge> sorted;
  std::vector<double> w;
  for (const auto& [e, weight] : pairs) {
    if (!sorted.empty() && sorted.back() == e) throw TopologyError("duplicate edge");
    sorted.push_back(e);
    w.push_back(weight);
  }
  return assemble(n, std::move(sorted), w);
}

std::vector<Edge> ring_edges(std::size_t n) {
  std::vector<Edge> edges;
  if (n < 2) return edges;
  if (n == 2) return {Edge{0, 1}};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    edges.push_back(Edge{std::min(i, j), std::max(i, j)});
  }
  return edges;
}

Vector ProblemInstance::total_demand() const {
  Vector total = Vector::Zero(static_cast<Eigen::Index>(m));
  for (const auto& a : agents) total += a.d;
  return total;
}

bool ProblemInstance::all_quadratic() const noexcept {
  return std::all_of(agents.begin(), agents.end(),
                     [](const AgentSpec& a) { return a.quadratic() != nullptr; });
}

void validate_instance(const ProblemInstance& instance) {
  if (instance.agents.empty()) throw InvalidInstance("no agents");
  if (instance.topology.n != instance.n()) {
    throw InvalidInstance("topology has " + std::to_string(instance.topology.n) +
                          " nodes for " + std::to_string(instance.n()) + " agents");
  }
  for (std::size_t i = 0; i < instance.n(); ++i) {
    const auto& a = instance.agents[i];
    validate_agent(a);
    if (a.p() != instance.p || a.m() != instance.m) {
      throw InvalidInstance("agent " + std::to_string(i) + " has A of size " +
                            dims(a.A.rows(), a.A.cols()) + ", instance expects " +
                            dims(static_cast<Eigen::Index>(instance.m),
                                 static_cast<Eigen::Index>(instance.p)));
    }
  }
  if (instance.curvature) {
    const auto& c = *instance.curvature;
    if (!(c.mu > 0.0) || !(c.ell >= c.mu)) {
      throw InvalidInstance("curvature bounds need ell >= mu > 0");
    }
  }
}

ProblemInstance generate_instance(std::uint64_t seed, std::size_t n, double r_max,
                                  std::size_t extra_edges, const InstanceRanges& ranges) {
  if (n < 2) throw InvalidInstance("need at least 2 agents, got " + std::to_string(n));
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InvalidInstance("r_max must be positive");
  if (!(ranges.c_min > 0.0) || ranges.c_max < ranges.c_min || !(ranges.eig_min > 0.0) ||
      ranges.eig_max < ranges.eig_min || !(ranges.q_max > 0.0)) {
    throw InvalidInstance("sampling ranges must be positive and ordered");
  }
  constexpr std::size_t p = 2;
  constexpr std::size_t m = 2;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  ProblemInstance inst;
  inst.p = p;
  inst.m = m;
  inst.agents.reserve(n);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double C = uniform(ranges.c_min, ranges.c_max);
    const double e0 = uniform(ranges.eig_min, ranges.eig_max);
    const double e1 = uniform(ranges.eig_min, ranges.eig_max);
    const double theta = uniform(0.0, 2.0 * std::numbers::pi);
    Matrix R(2, 2);
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    Matrix P = R * Eigen::Vector2d(e0, e1).asDiagonal() * R.transpose();
    P = 0.5 * (P + P.transpose()).eval();
    Vector Q(2);
    // 1 - U[0,1) lies in (0, 1].
    Q << ranges.q_max * (1.0 - unit(rng)), ranges.q_max * (1.0 - unit(rng));

    AgentSpec spec{QuadraticCost(std::move(P), std::move(Q)), Matrix::Zero(2, 2),
                   Vector(2), C};
    spec.A(0, 0) = 1.0;
    spec.A(1, 1) = C;
    spec.d << r_max / nd, 1.0 / nd;
    inst.agents.push_back(std::move(spec));
  }

  auto edges = ring_edges(n);
  std::set<Edge> present(edges.begin(), edges.end());
  const std::size_t max_edges = n * (n - 1) / 2;
  if (present.size() + extra_edges > max_edges) {
    throw InvalidInstance("cannot add " + std::to_string(extra_edges) + " chords to a ring of " +
                          std::to_string(n));
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t added = 0;
  while (added < extra_edges) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    if (a == b) continue;
    const Edge e{std::min(a, b), std::max(a, b)};
    if (present.insert(e).second) {
      edges.push_back(e);
      ++added;
    }
  }
  inst.topology = metropolis_weights(n, edges);
  validate_instance(inst);
  return inst;
}

SpectralConstants spectral_constants(const ProblemInstance& instance) {
  validate_instance(instance);
  SpectralConstants sc;
  if (instance.all_quadratic()) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& a : instance.agents) {
      lo = std::min(lo, a.quadratic()->min_eigenvalue());
      hi = std::max(hi, a.quadratic()->max_eigenvalue());
    }
    sc.ell = 2.0 * hi;
    sc.mu = 2.0 * lo;
  } else if (instance.curvature) {
    sc.ell = instance.curvature->ell;
    sc.mu = instance.curvature->mu;
  } else {
    throw InvalidInstance("non-quadratic costs need user-supplied curvature bounds");
  }

  sc.sigma_A_min = std::numeric_limits<double>::infinity();
  for (const auto& a : instance.agents) {
    Eigen::JacobiSVD<Matrix> svd(a.A);
    sc.sigma_A_max = std::max(sc.sigma_A_max, svd.singularValues().maxCoeff());
    sc.sigma_A_min = std::min(sc.sigma_A_min, svd.singularValues().minCoeff());
  }
  sc.kappa_A = sc.sigma_A_max / sc.sigma_A_min;

  // L is symmetric PSD with a simple zero eigenvalue (connected graph);
  // eigenvalues come back ascending, so index 1 is the smallest nonzero one.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(instance.topology.L, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  sc.sigma_L_max = ev(ev.size() - 1);
  sc.sigma_L_min = ev.size() > 1 ? ev(1) : 0.0;
  return sc;
}

}  // namespace danyra

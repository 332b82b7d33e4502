#pragma once

// Problem model for constraint-coupled resource allocation:
//
//   minimize   sum_i f_i(x_i)
//   subject to sum_i A_i x_i <= sum_i d_i      (or == in equality mode)
//
// over an undirected, connected agent network with doubly stochastic
// weights. Everything here is immutable after construction.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace danyra {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ConstraintMode { kInequality, kEquality };

/// f(x) = x^T P x - Q^T x with P symmetric positive definite.
class QuadraticCost {
 public:
  /// Throws InvalidInstance unless P is square, symmetric within 1e-12 and
  /// positive definite, and Q has matching size.
  QuadraticCost(Matrix P, Vector Q);

  const Matrix& P() const noexcept { return P_; }
  const Vector& Q() const noexcept { return Q_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(Q_.size()); }

  double value(const Vector& x) const { return x.dot(P_ * x) - Q_.dot(x); }
  Vector gradient(const Vector& x) const { return 2.0 * (P_ * x) - Q_; }

  double min_eigenvalue() const noexcept { return eig_min_; }
  double max_eigenvalue() const noexcept { return eig_max_; }

 private:
  Matrix P_;
  Vector Q_;
  double eig_min_ = 0.0;
  double eig_max_ = 0.0;
};

/// Arbitrary smooth convex cost given as a value/gradient oracle pair.
/// Curvature constants cannot be derived from it; supply them through
/// ProblemInstance::curvature.
struct GenericCost {
  std::size_t dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

using Cost = std::variant<QuadraticCost, GenericCost>;

struct AgentSpec {
  Cost cost;
  Matrix A;  // m x p, full row rank
  Vector d;  // m
  /// Second diagonal entry of A when A = blkdiag(1, C); informational only.
  std::optional<double> C;

  std::size_t p() const noexcept { return static_cast<std::size_t>(A.cols()); }
  std::size_t m() const noexcept { return static_cast<std::size_t>(A.rows()); }
  const QuadraticCost* quadratic() const noexcept {
    return std::get_if<QuadraticCost>(&cost);
  }
};

double cost_value(const AgentSpec& spec, const Vector& x);
Vector cost_gradient(const AgentSpec& spec, const Vector& x);

/// Throws InvalidInstance if A is not m x p with p >= m and smallest
/// singular value > 1e-10, or if cost/demand dimensions disagree.
void validate_agent(const AgentSpec& spec);

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;  // i < j
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Neighbor {
  std::size_t index = 0;
  double weight = 0.0;
};

/// Undirected weighted communication graph. Neighbor lists are sorted by
/// ascending index; every neighbour reduction in the engine walks them in
/// that order so results do not depend on thread scheduling.
struct Topology {
  std::size_t n = 0;
  std::vector<Edge> edges;                         // sorted, i < j
  std::vector<std::vector<Neighbor>> neighbors;    // per agent, ascending
  Matrix W;                                        // doubly stochastic
  Matrix L;                                        // l_ii = sum_j w_ij, l_ij = -w_ij

  std::vector<double> edge_weights() const;
};

/// Metropolis-Hastings weights w_ij = 1 / (1 + max(deg_i, deg_j)).
/// Throws TopologyError on self loops, out-of-range ids or a disconnected
/// graph. Duplicate edges (either orientation) are merged.
Topology metropolis_weights(std::size_t n, const std::vector<Edge>& edges);

/// Rebuilds a topology from explicit per-edge weights (e.g. read from a
/// file) and checks symmetry, unit row/column sums within 1e-12 and
/// connectivity.
Topology topology_from_weights(std::size_t n, const std::vector<Edge>& edges,
                               const std::vector<double>& weights);

/// Ring 0-1-...-(n-1)-0; for n == 2 this is the single edge {0,1}.
std::vector<Edge> ring_edges(std::size_t n);

/// User-supplied curvature constants for non-quadratic costs.
struct CurvatureBounds {
  double ell = 0.0;
  double mu = 0.0;
};

struct ProblemInstance {
  std::vector<AgentSpec> agents;
  Topology topology;
  std::size_t p = 0;
  std::size_t m = 0;
  std::optional<CurvatureBounds> curvature;

  std::size_t n() const noexcept { return agents.size(); }
  Vector total_demand() const;
  bool all_quadratic() const noexcept;
};

/// Checks shared dimensions, every agent, and the topology size.
void validate_instance(const ProblemInstance& instance);

/// Sampling ranges for the synthetic industrial-IoT instance family.
struct InstanceRanges {
  double c_min = 0.5;      // C_i ~ U[c_min, c_max]
  double c_max = 2.0;
  double eig_min = 0.5;    // eigenvalues of P_i ~ U[eig_min, eig_max]
  double eig_max = 2.0;
  double q_max = 1.0;      // Q_i entries ~ U(0, q_max]
};

/// p = m = 2, A_i = blkdiag(1, C_i), d_i = [r_max/n, 1/n], quadratic costs
/// with random orthogonal eigenbases, topology = ring + `extra_edges`
/// random chords with Metropolis weights. Bit-identical for a fixed seed.
ProblemInstance generate_instance(std::uint64_t seed, std::size_t n, double r_max,
                                  std::size_t extra_edges,
                                  const InstanceRanges& ranges = {});

struct SpectralConstants {
  double ell = 0.0;
  double mu = 0.0;
  double sigma_A_max = 0.0;
  double sigma_A_min = 0.0;
  double kappa_A = 0.0;
  double sigma_L_max = 0.0;
  double sigma_L_min = 0.0;  // smallest nonzero eigenvalue of L
};

/// ell = 2 max_i lambda_max(P_i), mu = 2 min_i lambda_min(P_i) for
/// quadratic instances; otherwise taken from instance.curvature (throws
/// InvalidInstance when absent). Singular values of blkdiag(A_i) are the
/// union of the per-block singular values.
SpectralConstants spectral_constants(const ProblemInstance& instance);

}  // namespace danyra

#include "danyra/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "danyra/error.hpp"

namespace danyra {

namespace {

Vector residual(const ProblemInstance& inst, const Vector& x) {
  const auto p = static_cast<Eigen::Index>(inst.p);
  Vector r = -inst.total_demand();
  for (std::size_t i = 0; i < inst.n(); ++i) {
    r += inst.agents[i].A * x.segment(static_cast<Eigen::Index>(i) * p, p);
  }
  return r;
}

double total_cost(const ProblemInstance& inst, const Vector& x) {
  const auto p = static_cast<Eigen::Index>(inst.p);
  double f = 0.0;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    f += cost_value(inst.agents[i], x.segment(static_cast<Eigen::Index>(i) * p, p));
  }
  return f;
}

void require_quadratic(const ProblemInstance& inst, const char* who) {
  validate_instance(inst);
  if (!inst.all_quadratic()) {
    throw OracleFailure(std::string(who) + " needs quadratic costs");
  }
}

// Solves the KKT system with the rows in `rows` active:
//   2 P_i x_i + A_{i,S}^T lambda_S = Q_i,   sum_i A_{i,S} x_i = (sum d)_S.
// Returns false when the system is singular.
bool solve_kkt(const ProblemInstance& inst, const std::vector<std::size_t>& rows, Vector& x,
               Vector& lambda) {
  const auto n = static_cast<Eigen::Index>(inst.n());
  const auto p = static_cast<Eigen::Index>(inst.p);
  const auto s = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index dim = n * p + s;
  Matrix K = Matrix::Zero(dim, dim);
  Vector rhs = Vector::Zero(dim);
  const Vector total = inst.total_demand();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& spec = inst.agents[static_cast<std::size_t>(i)];
    const auto* q = spec.quadratic();
    K.block(i * p, i * p, p, p) = 2.0 * q->P();
    rhs.segment(i * p, p) = q->Q();
    for (Eigen::Index r = 0; r < s; ++r) {
      const auto row = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
      K.block(i * p, n * p + r, p, 1) = spec.A.row(row).transpose();
      K.block(n * p + r, i * p, 1, p) = spec.A.row(row);
    }
  }
  for (Eigen::Index r = 0; r < s; ++r) {
    rhs(n * p + r) = total(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]));
  }
  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible()) return false;
  const Vector sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;
  x = sol.head(n * p);
  lambda = Vector::Zero(static_cast<Eigen::Index>(inst.m));
  for (Eigen::Index r = 0; r < s; ++r) {
    lambda(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)])) = sol(n * p + r);
  }
  return true;
}

// argmin_x f_i(x) + lambda^T A_i x.
Vector lagrangian_minimizer(const AgentSpec& spec, const Vector& lambda, const Vector& warm,
                            double ell) {
  const Vector shift = spec.A.transpose() * lambda;
  if (const auto* q = spec.quadratic()) {
    return (2.0 * q->P()).ldlt().solve(q->Q() - shift);
  }
  Vector x = warm;
  const double step = 1.0 / ell;
  for (int it = 0; it < 100000; ++it) {
    const Vector g = cost_gradient(spec, x) + shift;
    if (g.norm() <= 1e-13) break;
    x -= step * g;
  }
  return x;
}

}  // namespace

double KktResiduals::max() const noexcept {
  return std::max({stationarity, primal, dual, complementarity});
}

KktResiduals kkt_residuals(const ProblemInstance& inst, const OracleSolution& sol) {
  const auto p = static_cast<Eigen::Index>(inst.p);
  KktResiduals res;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const auto& spec = inst.agents[i];
    const Vector xi = sol.x_star.segment(static_cast<Eigen::Index>(i) * p, p);
    const Vector g = cost_gradient(spec, xi) + spec.A.transpose() * sol.lambda_star;
    res.stationarity = std::max(res.stationarity, g.norm());
  }
  const Vector r = residual(inst, sol.x_star);
  if (sol.mode == ConstraintMode::kEquality) {
    res.primal = r.lpNorm<Eigen::Infinity>();
  } else {
    res.primal = r.cwiseMax(0.0).maxCoeff();
    res.dual = (-sol.lambda_star).cwiseMax(0.0).maxCoeff();
    res.complementarity = std::abs(sol.lambda_star.dot(r));
  }
  return res;
}

OracleSolution solve_active_set(const ProblemInstance& inst, const ActiveSetOptions& options) {
  require_quadratic(inst, "solve_active_set");
  if (inst.m > options.max_rows) {
    throw OracleFailure("active-set enumeration is limited to m <= " +
                        std::to_string(options.max_rows) + ", got m = " + std::to_string(inst.m));
  }
  const std::size_t subsets = std::size_t{1} << inst.m;
  std::vector<std::size_t> order(subsets);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.shuffle_seed) {
    std::mt19937_64 rng(*options.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  for (const std::size_t mask : order) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < inst.m; ++r) {
      if (mask & (std::size_t{1} << r)) rows.push_back(r);
    }
    Vector x;
    Vector lambda;
    if (!solve_kkt(inst, rows, x, lambda)) continue;
    const Vector r = residual(inst, x);
    const double scale = 1.0 + inst.total_demand().lpNorm<Eigen::Infinity>();
    bool ok = true;
    for (std::size_t row = 0; row < inst.m && ok; ++row) {
      const auto idx = static_cast<Eigen::Index>(row);
      const bool active = mask & (std::size_t{1} << row);
      if (active) {
        ok = lambda(idx) >= -options.tolerance;
      } else {
        ok = r(idx) <= options.tolerance * scale;
      }
    }
    if (!ok) continue;
    OracleSolution sol;
    sol.x_star = std::move(x);
    sol.lambda_star = lambda.cwiseMax(0.0);
    sol.f_star = total_cost(inst, sol.x_star);
    sol.active_set = std::move(rows);
    sol.mode = ConstraintMode::kInequality;
    return sol;
  }
  throw OracleFailure("no active set satisfies the KKT conditions");
}

OracleSolution solve_equality(const ProblemInstance& inst) {
  require_quadratic(inst, "solve_equality");
  std::vector<std::size_t> rows(inst.m);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  OracleSolution sol;
  if (!solve_kkt(inst, rows, sol.x_star, sol.lambda_star)) {
    throw OracleFailure("degenerate instance: KKT matrix is singular");
  }
  sol.f_star = total_cost(inst, sol.x_star);
  sol.active_set = std::move(rows);
  sol.mode = ConstraintMode::kEquality;
  return sol;
}

OracleSolution reference_projected_gradient(const ProblemInstance& inst, std::size_t iters,
                                            double step, ConstraintMode mode) {
  validate_instance(inst);
  const auto n = inst.n();
  const auto p = static_cast<Eigen::Index>(inst.p);
  const auto m = static_cast<Eigen::Index>(inst.m);

  double ell = 0.0;
  if (step <= 0.0 || !inst.all_quadratic()) {
    const auto sc = spectral_constants(inst);
    ell = sc.ell;
    if (step <= 0.0) {
      if (inst.all_quadratic()) {
        Matrix M = Matrix::Zero(m, m);
        for (const auto& spec : inst.agents) {
          M += spec.A * (2.0 * spec.quadratic()->P()).ldlt().solve(spec.A.transpose());
        }
        step = 1.0 / Eigen::SelfAdjointEigenSolver<Matrix>(M).eigenvalues().maxCoeff();
      } else {
        step = sc.mu / (static_cast<double>(n) * sc.sigma_A_max * sc.sigma_A_max);
      }
    }
  }

  OracleSolution sol;
  sol.mode = mode;
  sol.lambda_star = Vector::Zero(m);
  sol.x_star = Vector::Zero(static_cast<Eigen::Index>(n) * p);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      auto seg = sol.x_star.segment(static_cast<Eigen::Index>(i) * p, p);
      seg = lagrangian_minimizer(inst.agents[i], sol.lambda_star, Vector(seg), ell);
    }
    if (kkt_residuals(inst, sol).max() <= 1e-9) {
      sol.f_star = total_cost(inst, sol.x_star);
      for (Eigen::Index r = 0; r < m; ++r) {
        if (mode == ConstraintMode::kEquality || sol.lambda_star(r) > 0.0) {
          sol.active_set.push_back(static_cast<std::size_t>(r));
        }
      }
      return sol;
    }
    sol.lambda_star += step * residual(inst, sol.x_star);
    if (mode == ConstraintMode::kInequality) sol.lambda_star = sol.lambda_star.cwiseMax(0.0);
  }
  throw OracleFailure("projected gradient did not reach KKT residual 1e-9 in " +
                      std::to_string(iters) + " iterations");
}

OracleSolution solve_oracle(const ProblemInstance& instance, ConstraintMode mode) {
  return mode == ConstraintMode::kEquality ? solve_equality(instance)
                                           : solve_active_set(instance);
}

}  // namespace danyra

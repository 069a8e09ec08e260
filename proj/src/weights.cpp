#include "mixqcd/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mixqcd/errors.hpp"

namespace mixqcd {

Vector nnls(const Matrix& A, const Vector& b, int max_iter) {
  const Eigen::Index n = A.cols();
  if (A.rows() != b.size()) throw InputError("nnls: dimension mismatch");
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);

  Vector x = Vector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.cwiseAbs().maxCoeff() *
                     static_cast<double>(std::max(A.rows(), A.cols()));

  // Least squares restricted to the passive columns.
  const auto solve_passive = [&](Vector& z) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    Matrix sub(A.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = A.col(cols[c]);
    const Vector zs = sub.colPivHouseholderQr().solve(b);
    z.setZero(n);
    for (std::size_t c = 0; c < cols.size(); ++c) z[cols[c]] = zs[static_cast<Eigen::Index>(c)];
  };

  Vector w = A.transpose() * (b - A * x);
  for (int outer = 0; outer < max_iter; ++outer) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    Vector z;
    for (int inner = 0; inner <= n; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) feasible = false;
      }
      if (feasible) break;
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          alpha = std::min(alpha, x[j] / (x[j] - z[j]));
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && std::abs(x[j]) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
    x = z;
    w = A.transpose() * (b - A * x);
  }
  return x.cwiseMax(0.0);
}

Vector project_to_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += u[static_cast<std::size_t>(j)];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
  }
  Vector out = (v.array() - theta).cwiseMax(0.0).matrix();
  const double s = out.sum();
  if (s > 0.0) out /= s;
  return out;
}

std::string to_string(WeightMode mode) {
  return mode == WeightMode::SimplexLs ? "simplex_ls" : "ols_rescale";
}

WeightMode parse_weight_mode(const std::string& text) {
  if (text == "simplex_ls" || text == "simplex") return WeightMode::SimplexLs;
  if (text == "ols_rescale" || text == "ols") return WeightMode::OlsRescale;
  throw InputError("unknown weight mode '" + text + "'");
}

WeightSolution solve_weights(const Matrix& A, const Vector& b, WeightMode mode) {
  const Eigen::Index m = A.cols();
  if (A.rows() != m || b.size() != m) throw InputError("solve_weights: need a square system");
  if (m == 0) throw InputError("solve_weights: empty system");

  Vector lambda;
  if (mode == WeightMode::SimplexLs) {
    constexpr double kEqualityWeight = 1e6;
    Matrix aug(m + 1, m);
    aug.topRows(m) = A;
    aug.row(m).setConstant(kEqualityWeight);
    Vector rhs(m + 1);
    rhs.head(m) = b;
    rhs[m] = kEqualityWeight;
    lambda = nnls(aug, rhs);
  } else {
    lambda = A.completeOrthogonalDecomposition().solve(b);
    lambda = lambda.cwiseMax(0.0);
  }

  WeightSolution out;
  const double total = lambda.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    out.lambda = Vector::Constant(m, 1.0 / static_cast<double>(m));
    out.fell_back_to_uniform = true;
    return out;
  }
  out.lambda = lambda / total;
  return out;
}

WeightSystem build_weight_system(const SortedSample& sample, const Vector& mu, const Vector& sigma,
                                 Family family) {
  const Eigen::Index m = mu.size();
  if (sigma.size() != m) throw InputError("build_weight_system: length mismatch");
  WeightSystem sys{Matrix(m, m), Vector(m)};
  for (Eigen::Index l = 0; l < m; ++l) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (!(sigma[k] > 0.0)) throw InputError("build_weight_system: scales must be positive");
      sys.A(l, k) = std_cdf(family, (mu[l] - mu[k]) / sigma[k]);
    }
    sys.b[l] = ecdf(sample, mu[l]);
  }
  return sys;
}

}  // namespace mixqcd

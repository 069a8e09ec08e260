#include <doctest.h>

#include <cmath>
#include <random>

#include "mixqcd/empirical.hpp"
#include "mixqcd/errors.hpp"
#include "mixqcd/weights.hpp"
#include "oracles.hpp"

using namespace mixqcd;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("NNLS satisfies the KKT conditions") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 3 + trial % 6;
    const int cols = 1 + trial % 5;
    Matrix A(rows, cols);
    Vector b(rows);
    for (int i = 0; i < rows; ++i) {
      b(i) = z(rng);
      for (int j = 0; j < cols; ++j) A(i, j) = z(rng);
    }
    const Vector x = nnls(A, b);
    const Vector grad = A.transpose() * (A * x - b);
    for (int j = 0; j < cols; ++j) {
      CHECK(x(j) >= 0.0);
      if (x(j) > 1e-10) {
        CHECK(std::abs(grad(j)) < 1e-8);
      } else {
        CHECK(grad(j) > -1e-8);
      }
    }
  }
  CHECK_THROWS_AS(nnls(Matrix::Identity(2, 2), Vector::Zero(3)), InputError);
}

TEST_CASE("simplex projection") {
  CHECK(project_to_simplex(vec({0.2, 0.3, 0.5})).isApprox(vec({0.2, 0.3, 0.5})));
  CHECK(project_to_simplex(vec({2.0, 0.0})).isApprox(vec({1.0, 0.0})));
  CHECK(project_to_simplex(vec({1.0, 1.0})).isApprox(vec({0.5, 0.5})));

  // the projection is the closest simplex point: compare to a grid
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  for (int t = 0; t < 100; ++t) {
    const Vector v = vec({z(rng), z(rng), z(rng)});
    const Vector p = project_to_simplex(v);
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p.minCoeff() >= 0.0);
    const double d = (p - v).squaredNorm();
    double best = 1e300;
    for (double a = 0; a <= 1.0; a += 0.01) {
      for (double c = 0; a + c <= 1.0 + 1e-12; c += 0.01) {
        best = std::min(best, (vec({a, c, std::max(0.0, 1 - a - c)}) - v).squaredNorm());
      }
    }
    CHECK(d <= best + 1e-12);
  }
}

TEST_CASE("solve_weights examples") {
  const auto a = solve_weights(Matrix::Identity(3, 3), vec({0.2, 0.3, 0.5}), WeightMode::SimplexLs);
  CHECK((a.lambda - vec({0.2, 0.3, 0.5})).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_FALSE(a.fell_back_to_uniform);

  const auto b = solve_weights(Matrix::Identity(2, 2), vec({-0.1, 0.9}), WeightMode::SimplexLs);
  CHECK((b.lambda - vec({0.0, 1.0})).cwiseAbs().maxCoeff() < 1e-4);

  const auto c = solve_weights(Matrix::Identity(3, 3), vec({0.2, 0.3, 0.5}), WeightMode::OlsRescale);
  CHECK((c.lambda - vec({0.2, 0.3, 0.5})).cwiseAbs().maxCoeff() < 1e-12);

  const auto d = solve_weights(Matrix::Identity(2, 2), vec({-0.1, 0.9}), WeightMode::OlsRescale);
  CHECK((d.lambda - vec({0.0, 1.0})).cwiseAbs().maxCoeff() < 1e-12);

  const auto e = solve_weights(Matrix::Identity(2, 2), vec({-0.1, -0.9}), WeightMode::OlsRescale);
  CHECK(e.fell_back_to_uniform);
  CHECK(e.lambda.isApprox(vec({0.5, 0.5})));

  // rank-deficient system still yields simplex weights
  Matrix rank1 = Matrix::Ones(2, 2);
  for (auto mode : {WeightMode::SimplexLs, WeightMode::OlsRescale}) {
    const auto r = solve_weights(rank1, vec({0.5, 0.5}), mode);
    CHECK(r.lambda.sum() == doctest::Approx(1.0));
    CHECK(r.lambda.minCoeff() >= 0.0);
  }

  CHECK_THROWS_AS(solve_weights(Matrix::Identity(2, 2), vec({1.0}), WeightMode::SimplexLs), InputError);
  CHECK(parse_weight_mode(to_string(WeightMode::OlsRescale)) == WeightMode::OlsRescale);
  CHECK_THROWS_AS(parse_weight_mode("lasso"), InputError);
}

TEST_CASE("simplex least squares matches a dense grid search") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int worse = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int m = 1 + trial % 3;
    Matrix A(m, m);
    Vector b(m);
    for (int i = 0; i < m; ++i) {
      b(i) = u(rng);
      for (int j = 0; j < m; ++j) A(i, j) = u(rng);
    }
    const auto sol = solve_weights(A, b, WeightMode::SimplexLs);
    CHECK(sol.lambda.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sol.lambda.minCoeff() >= 0.0);
    const double got = oracle::residual_sq(A, b, sol.lambda);
    const double best = oracle::simplex_grid_min(A, b);
    if (got > best + 1e-6) ++worse;
  }
  CHECK(worse == 0);
}

TEST_CASE("weight system construction") {
  const SortedSample s({-1.0, 0.0, 0.5, 1.0, 3.0});
  const auto one = build_weight_system(s, vec({0.5}), vec({2.0}), Family::Cauchy);
  CHECK(one.A(0, 0) == 0.5);
  CHECK(one.b(0) == doctest::Approx(0.6));

  const auto two = build_weight_system(s, vec({0.0, 1.0}), vec({1.0, 1.0}), Family::Cauchy);
  CHECK(two.A(0, 0) == doctest::Approx(0.5));
  CHECK(two.A(0, 1) == doctest::Approx(0.25));
  CHECK(two.A(1, 0) == doctest::Approx(0.75));
  CHECK(two.A(1, 1) == doctest::Approx(0.5));
  CHECK(two.b(0) == doctest::Approx(0.4));
  CHECK(two.b(1) == doctest::Approx(0.8));

  // A(l, k) increases with mu_l for fixed k
  const auto many = build_weight_system(s, vec({-2.0, -0.3, 0.4, 2.5}), vec({0.5, 1.0, 2.0, 0.1}), Family::Normal);
  for (int k = 0; k < 4; ++k) {
    for (int l = 1; l < 4; ++l) CHECK(many.A(l, k) > many.A(l - 1, k));
  }
  CHECK_THROWS_AS(build_weight_system(s, vec({0.0, 1.0}), vec({1.0}), Family::Cauchy), InputError);
  CHECK_THROWS_AS(build_weight_system(s, vec({0.0}), vec({0.0}), Family::Cauchy), InputError);
}

#pragma once

#include <string>

#include "mixqcd/empirical.hpp"
#include "mixqcd/mixture.hpp"

namespace mixqcd {

/// Lawson-Hanson active-set solution of min ||A x - b||^2 s.t. x >= 0.
Vector nnls(const Matrix& A, const Vector& b, int max_iter = 0);

/// Euclidean projection onto {x >= 0, sum x = 1}.
Vector project_to_simplex(const Vector& v);

enum class WeightMode { SimplexLs, OlsRescale };

std::string to_string(WeightMode mode);
WeightMode parse_weight_mode(const std::string& text);

struct WeightSolution {
  Vector lambda;
  /// Set when the clipped solution was all zero and uniform weights were used.
  bool fell_back_to_uniform = false;
};

/// Solves A lambda = b on the probability simplex.
///
/// SimplexLs: NNLS on [A; w 1^T] lambda = [b; w] with w = 1e6, then exact
/// renormalization. OlsRescale: unconstrained least squares (pseudo-inverse
/// when A is rank deficient), negatives clipped to zero, renormalized.
WeightSolution solve_weights(const Matrix& A, const Vector& b, WeightMode mode);

struct WeightSystem {
  Matrix A;  ///< A(l, k) = G((mu_l - mu_k) / sigma_k)
  Vector b;  ///< b(l) = F_n(mu_l)
};

WeightSystem build_weight_system(const SortedSample& sample, const Vector& mu, const Vector& sigma,
                                 Family family);

}  // namespace mixqcd

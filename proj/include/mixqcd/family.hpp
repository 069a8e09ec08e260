#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include <boost/math/special_functions/erf.hpp>

#include "mixqcd/errors.hpp"

namespace mixqcd {

/// Standardized location-scale family. Every member has a unimodal density
/// peaked at 0, full support on the real line and a closed-form CDF.
enum class Family { Cauchy, Normal, Logistic };

std::string to_string(Family family);
Family parse_family(std::string_view name);

namespace detail {
// Quantile arguments are kept away from {0, 1} so tail draws stay finite.
inline constexpr double kQuantileClamp = 1e-15;
}  // namespace detail

/// Standard density g(z).
template <typename Scalar>
Scalar std_pdf(Family family, Scalar z) {
  using std::exp;
  using std::abs;
  if (!std::isfinite(static_cast<double>(z))) {
    throw InputError("std_pdf: argument must be finite");
  }
  switch (family) {
    case Family::Cauchy:
      return Scalar(std::numbers::inv_pi) / (Scalar(1) + z * z);
    case Family::Normal:
      return Scalar(std::numbers::inv_sqrtpi / std::numbers::sqrt2) * exp(-z * z / Scalar(2));
    case Family::Logistic: {
      const Scalar e = exp(-abs(z));
      return e / ((Scalar(1) + e) * (Scalar(1) + e));
    }
  }
  return Scalar(0);
}

/// log g(z), accurate far into the tails.
template <typename Scalar>
Scalar std_log_pdf(Family family, Scalar z) {
  using std::abs;
  using std::exp;
  using std::log;
  using std::log1p;
  switch (family) {
    case Family::Cauchy:
      return -Scalar(std::log(std::numbers::pi)) - log1p(z * z);
    case Family::Normal:
      return -z * z / Scalar(2) - Scalar(0.5 * std::log(2.0 * std::numbers::pi));
    case Family::Logistic:
      return -abs(z) - Scalar(2) * log1p(exp(-abs(z)));
  }
  return Scalar(0);
}

/// Standard CDF G(z); accepts +-infinity.
template <typename Scalar>
Scalar std_cdf(Family family, Scalar z) {
  using std::atan;
  using std::erfc;
  using std::exp;
  if (std::isinf(static_cast<double>(z))) return z > Scalar(0) ? Scalar(1) : Scalar(0);
  switch (family) {
    case Family::Cauchy:
      // atan(z) loses relative accuracy in the far left tail; use the
      // reflected form there.
      if (z < Scalar(-1)) return atan(Scalar(-1) / z) * Scalar(std::numbers::inv_pi);
      return Scalar(0.5) + atan(z) * Scalar(std::numbers::inv_pi);
    case Family::Normal:
      return Scalar(0.5) * erfc(-z / Scalar(std::numbers::sqrt2));
    case Family::Logistic:
      if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
      {
        const Scalar e = exp(z);
        return e / (Scalar(1) + e);
      }
  }
  return Scalar(0);
}

/// Standard quantile G^{-1}(p). p is clamped to [1e-15, 1 - 1e-15].
template <typename Scalar>
Scalar std_quantile(Family family, Scalar p) {
  using std::log;
  using std::tan;
  const Scalar lo = Scalar(detail::kQuantileClamp);
  if (p < lo) p = lo;
  if (p > Scalar(1) - lo) p = Scalar(1) - lo;
  switch (family) {
    case Family::Cauchy:
      return tan(Scalar(std::numbers::pi) * (p - Scalar(0.5)));
    case Family::Normal:
      return -Scalar(std::numbers::sqrt2) * boost::math::erfc_inv(Scalar(2) * p);
    case Family::Logistic:
      return log(p / (Scalar(1) - p));
  }
  return Scalar(0);
}

/// Variance of the standard member, or +infinity when it has no second moment.
inline double std_variance(Family family) {
  switch (family) {
    case Family::Cauchy:
      return std::numeric_limits<double>::infinity();
    case Family::Normal:
      return 1.0;
    case Family::Logistic:
      return std::numbers::pi * std::numbers::pi / 3.0;
  }
  return 0.0;
}

}  // namespace mixqcd

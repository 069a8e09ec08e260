#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "mixqcd/family.hpp"

namespace mixqcd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Finite mixture of location-scale components
///   f(x) = sum_k lambda_k g((x - mu_k) / sigma_k) / sigma_k.
///
/// Immutable once built. Construction checks that mu is non-decreasing,
/// sigma is positive and lambda lies on the simplex (the weights are
/// renormalized so they sum to one to machine precision).
class MixtureModel {
 public:
  MixtureModel(Family family, Vector mu, Vector sigma, Vector lambda);

  /// Same as the constructor but first sorts the components by location.
  static MixtureModel sorted(Family family, Vector mu, Vector sigma, Vector lambda);

  Family family() const noexcept { return family_; }
  Eigen::Index m() const noexcept { return mu_.size(); }
  const Vector& mu() const noexcept { return mu_; }
  const Vector& sigma() const noexcept { return sigma_; }
  const Vector& lambda() const noexcept { return lambda_; }

  /// Density of component k alone (not weighted).
  double component_pdf(Eigen::Index k, double x) const;
  double component_cdf(Eigen::Index k, double x) const;

  /// Applies x -> c x + d to every component (c > 0).
  MixtureModel affine(double c, double d) const;

 private:
  Family family_;
  Vector mu_;
  Vector sigma_;
  Vector lambda_;
};

double mixture_pdf(const MixtureModel& model, double x);
double mixture_log_pdf(const MixtureModel& model, double x);
double mixture_cdf(const MixtureModel& model, double x);

/// Unique root of mixture_cdf(x) = 1/2, to 1e-10 absolute.
double mixture_median(const MixtureModel& model);

/// n iid draws. Component index is drawn from the weights, then the location
/// is shifted/scaled from a standard quantile draw. Deterministic in seed.
std::vector<double> sample(const MixtureModel& model, std::size_t n, std::uint64_t seed);

nlohmann::ordered_json to_json(const MixtureModel& model);
MixtureModel model_from_json(const nlohmann::json& j);
MixtureModel load_model(const std::string& path);

}  // namespace mixqcd

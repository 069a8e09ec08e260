#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

#include "mixqcd/mixture.hpp"

namespace mixqcd {

struct Integral {
  double value;
  double error_estimate;
};

/// Integral of f over the real line. Substitutes x = tan(theta) and runs
/// adaptive Simpson on (-pi/2, pi/2). `features` are x locations where f has
/// narrow structure (peaks, kinks); they seed the initial panel boundaries.
/// Throws IntegrationError when a panel needs more than 60 bisections.
Integral integrate_real_line(const std::function<double(double)>& f, double abs_tol = 1e-8,
                             std::span<const double> features = {});

/// One location-scale component.
struct ComponentDensity {
  Family family;
  double mu;
  double sigma;
  double operator()(double x) const { return std_pdf(family, (x - mu) / sigma) / sigma; }
};

/// Degree of overlap: integral of min(g1, g2).
double dol(const ComponentDensity& g1, const ComponentDensity& g2, double abs_tol = 1e-8);

/// Weighted degree of overlap: integral of min_k lambda_k g_k over min_k lambda_k.
double wdol(const MixtureModel& model, double abs_tol = 1e-8);

/// Between-component dispersion Var(E[X|Z]) / Var(X); empty when the family
/// has no second moment.
std::optional<double> bcd(const MixtureModel& model);

struct RbcdResult {
  double value;
  /// The population denominator E|X - Med X| is infinite for this family; the
  /// value is a finite-sample Monte Carlo estimate only.
  bool divergent_denominator;
};

/// Robust dispersion sum_k lambda_k |mu_k - Med X| / E|X - Med X|, with the
/// denominator estimated from mc_n draws.
RbcdResult rbcd(const MixtureModel& model, std::size_t mc_n, std::uint64_t seed);

struct OverlapReport {
  std::optional<double> dol;
  double wdol;
  std::optional<double> bcd;
  RbcdResult rbcd;
  double quadrature_abs_err;
};

OverlapReport overlap_report(const MixtureModel& model, std::size_t mc_n, std::uint64_t seed,
                             double abs_tol = 1e-8);

nlohmann::ordered_json to_json(const OverlapReport& report);

}  // namespace mixqcd

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixqcd/changepoint.hpp"
#include "mixqcd/empirical.hpp"
#include "mixqcd/mixture.hpp"
#include "mixqcd/weights.hpp"

namespace mixqcd {

enum class Method { Niqcd, Iqcd };

std::string to_string(Method method);
Method parse_method(const std::string& text);

/// Tuning knobs shared by both pipelines.
struct FitConfig {
  /// Size of the initial quantile grid; 0 means floor(sqrt(n)).
  std::size_t m_init = 0;
  double tau = 1.0;        ///< scale divisor, >= 1
  double epsilon = 0.05;   ///< cusum threshold, in (0, 1)
  double kappa = 1e-3;     ///< relative NLL stopping tolerance, > 0
  int max_iter = 200;
  WeightMode weight_mode = WeightMode::SimplexLs;
  bool refine = true;      ///< coordinate descent after the closed-form start
  Penalty cp_penalty = Penalty::bic();

  /// Throws InputError when a field is outside its admissible range.
  void validate() const;
  std::size_t resolved_m_init(std::size_t n) const;
};

struct FitReport {
  explicit FitReport(MixtureModel fitted) : model(std::move(fitted)) {}

  MixtureModel model;
  double nll = 0.0;
  std::vector<double> nll_trace;
  int iterations = 0;
  double elapsed_seconds = 0.0;
  Method method = Method::Niqcd;
  /// Weight solver fell back to uniform weights.
  bool weight_fallback = false;
};

nlohmann::ordered_json to_json(const FitReport& report);

/// mu_k = x_([n k / (m_init + 1)]), k = 1..m_init.
Vector init_locations(const SortedSample& sample, std::size_t m_init);

/// sigma_k = (x_([n (k+1) / (m+2)]) - x_([n k / (m+2)])) / (2 tau); zero
/// scales are floored at 1e-8 times the sample range.
Vector init_scales(const SortedSample& sample, std::size_t m_hat, double tau);

/// Smallest k whose k largest weights sum to at least 1 - epsilon.
std::size_t cusum_count(const Vector& weights, double epsilon);

double negative_log_likelihood(const MixtureModel& model, const SortedSample& sample);

/// Blockwise minimization of the NLL: every scale, then every location, then
/// the weight vector. Accepted moves never increase the NLL. Stops when the
/// relative NLL change drops below kappa or after max_iter sweeps.
FitReport coordinate_descent(const MixtureModel& start, const SortedSample& sample, const FitConfig& cfg);

/// Quantile grid -> change points -> collapsed locations -> quantile scales ->
/// simplex-constrained weights -> optional coordinate descent.
FitReport fit_niqcd(const SortedSample& sample, const FitConfig& cfg, Family family);

/// Iterative variant: responsibilities, median/IQR updates and cusum pruning.
FitReport fit_iqcd(const SortedSample& sample, const FitConfig& cfg, Family family);

FitReport fit(const SortedSample& sample, const FitConfig& cfg, Family family, Method method);

/// Location collapse shared by both pipelines: grid of m_init quantiles,
/// segmented, one median per segment.
Vector initial_locations(const SortedSample& sample, const FitConfig& cfg);

}  // namespace mixqcd

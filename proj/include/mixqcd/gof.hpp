#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mixqcd/empirical.hpp"
#include "mixqcd/mixture.hpp"

namespace mixqcd {

enum class AdMethod { AsymptoticCase0, ParametricBootstrap };

std::string to_string(AdMethod method);
AdMethod parse_ad_method(const std::string& text);

struct AdResult {
  double a2;
  double p_value;
  AdMethod method;
  std::optional<int> bootstrap_b;
};

nlohmann::ordered_json to_json(const AdResult& result);

/// Anderson-Darling statistic
///   A^2 = -n - (1/n) sum_i (2i - 1) [ln F(x_(i)) + ln(1 - F(x_(n+1-i)))]
/// with F clamped to [1e-15, 1 - 1e-15].
double ad_statistic(const SortedSample& sample, const std::function<double(double)>& cdf);

/// Upper tail P(A^2 >= a2) for a fully specified null with sample size n
/// (Marsaglia & Marsaglia asymptotic series plus finite-n correction).
double ad_pvalue_case0(double a2, std::size_t n);

/// P(A^2_inf <= z), the limiting null CDF.
double ad_limit_cdf(double z);

/// Goodness of fit of `sample` against `model`. Bootstrap replicates are
/// drawn from the model without refitting; replicate r uses
/// derive_seed(seed, r), so the p-value does not depend on `threads`.
AdResult ad_test(const SortedSample& sample, const MixtureModel& model, AdMethod method = AdMethod::AsymptoticCase0,
                 int bootstrap_b = 499, std::uint64_t seed = 0, std::size_t threads = 1);

}  // namespace mixqcd

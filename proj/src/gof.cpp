#include "mixqcd/gof.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mixqcd/errors.hpp"
#include "mixqcd/parallel.hpp"
#include "mixqcd/random.hpp"

namespace mixqcd {

std::string to_string(AdMethod method) {
  return method == AdMethod::AsymptoticCase0 ? "asymptotic_case0" : "parametric_bootstrap";
}

AdMethod parse_ad_method(const std::string& text) {
  if (text == "asymptotic" || text == "asymptotic_case0") return AdMethod::AsymptoticCase0;
  if (text == "bootstrap" || text == "parametric_bootstrap") return AdMethod::ParametricBootstrap;
  throw InputError("unknown AD method '" + text + "'");
}

nlohmann::ordered_json to_json(const AdResult& result) {
  nlohmann::ordered_json j;
  j["a2"] = result.a2;
  j["p_value"] = result.p_value;
  j["method"] = to_string(result.method);
  if (result.bootstrap_b) {
    j["bootstrap_b"] = *result.bootstrap_b;
  } else {
    j["bootstrap_b"] = nullptr;
  }
  return j;
}

double ad_statistic(const SortedSample& sample, const std::function<double(double)>& cdf) {
  const std::size_t n = sample.n();
  constexpr double lo = 1e-15;
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = std::clamp(cdf(sample[i]), lo, 1.0 - lo);
    if (!std::isfinite(u[i])) throw InputError("ad_statistic: cdf returned a non-finite value");
    if (i > 0 && u[i] < u[i - 1]) throw InputError("ad_statistic: cdf is not monotone on the sample");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += static_cast<double>(2 * i + 1) * (std::log(u[i]) + std::log1p(-u[n - 1 - i]));
  }
  return -static_cast<double>(n) - s / static_cast<double>(n);
}

double ad_limit_cdf(double z) {
  if (!(z > 0.0)) return 0.0;
  if (z < 2.0) {
    return std::exp(-1.2337141 / z) / std::sqrt(z) *
           (2.00012 + (.247105 - (.0649821 - (.0347962 - (.011672 - .00168691 * z) * z) * z) * z) * z);
  }
  return std::exp(-std::exp(1.0776 - (2.30695 - (.43424 - (.082433 - (.008056 - .0003146 * z) * z) * z) * z) * z));
}

namespace {

double ad_finite_n_correction(std::size_t n_int, double x) {
  const auto n = static_cast<double>(n_int);
  if (x > .8) {
    return (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x) / n;
  }
  const double c = .01265 + .1757 / n;
  if (x < c) {
    double t = x / c;
    t = std::sqrt(t) * (1. - t) * (49 * t - 102);
    return t * (.0037 / (n * n) + .00078 / n + .00006) / n;
  }
  double t = (x - c) / (.8 - c);
  t = -.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t;
  return t * (.04213 / n + .01365 / (n * n)) / n;
}

}  // namespace

double ad_pvalue_case0(double a2, std::size_t n) {
  if (n == 0) throw InputError("ad_pvalue_case0: n must be positive");
  const double x = ad_limit_cdf(a2);
  const double cdf = x + ad_finite_n_correction(n, x);
  return std::clamp(1.0 - cdf, 0.0, 1.0);
}

AdResult ad_test(const SortedSample& sample, const MixtureModel& model, AdMethod method, int bootstrap_b,
                 std::uint64_t seed, std::size_t threads) {
  const auto cdf = [&model](double x) { return mixture_cdf(model, x); };
  const double a2 = ad_statistic(sample, cdf);
  if (method == AdMethod::AsymptoticCase0) {
    return {a2, ad_pvalue_case0(a2, sample.n()), method, std::nullopt};
  }
  if (bootstrap_b < 199) throw InputError("bootstrap AD test needs b >= 199");
  std::vector<double> replicate(static_cast<std::size_t>(bootstrap_b));
  parallel_for(replicate.size(), threads, [&](std::size_t r) {
    const SortedSample rep(mixqcd::sample(model, sample.n(), derive_seed(seed, r)));
    replicate[r] = ad_statistic(rep, cdf);
  });
  const auto exceed = std::count_if(replicate.begin(), replicate.end(), [a2](double v) { return v >= a2; });
  const double p = (1.0 + static_cast<double>(exceed)) / (static_cast<double>(bootstrap_b) + 1.0);
  return {a2, p, method, bootstrap_b};
}

}  // namespace mixqcd

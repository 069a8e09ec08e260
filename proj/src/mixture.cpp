#include "mixqcd/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "mixqcd/errors.hpp"
#include "mixqcd/random.hpp"

namespace mixqcd {

std::string to_string(Family family) {
  switch (family) {
    case Family::Cauchy:
      return "cauchy";
    case Family::Normal:
      return "normal";
    case Family::Logistic:
      return "logistic";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "cauchy") return Family::Cauchy;
  if (lower == "normal" || lower == "gaussian") return Family::Normal;
  if (lower == "logistic") return Family::Logistic;
  throw InputError("unknown family '" + std::string(name) + "'");
}

MixtureModel::MixtureModel(Family family, Vector mu, Vector sigma, Vector lambda)
    : family_(family), mu_(std::move(mu)), sigma_(std::move(sigma)), lambda_(std::move(lambda)) {
  const auto m = mu_.size();
  if (m < 1) throw InputError("mixture model needs at least one component");
  if (sigma_.size() != m || lambda_.size() != m) {
    throw InputError("mixture model: mu, sigma and lambda must have equal length");
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    if (!std::isfinite(mu_[k])) throw InputError("mixture model: non-finite location");
    if (!(sigma_[k] > 0.0) || !std::isfinite(sigma_[k])) {
      throw InputError("mixture model: scales must be positive and finite");
    }
    if (!(lambda_[k] >= 0.0) || !std::isfinite(lambda_[k])) {
      throw InputError("mixture model: weights must be non-negative");
    }
    if (k > 0 && mu_[k] < mu_[k - 1]) {
      throw InputError("mixture model: locations must be non-decreasing");
    }
  }
  const double total = lambda_.sum();
  if (std::abs(total - 1.0) > 1e-6) {
    throw InputError("mixture model: weights must sum to one");
  }
  lambda_ /= total;
}

MixtureModel MixtureModel::sorted(Family family, Vector mu, Vector sigma, Vector lambda) {
  const auto m = mu.size();
  if (sigma.size() != m || lambda.size() != m) {
    throw InputError("mixture model: mu, sigma and lambda must have equal length");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return mu[a] < mu[b]; });
  Vector mu_s(m), sigma_s(m), lambda_s(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    mu_s[k] = mu[order[static_cast<std::size_t>(k)]];
    sigma_s[k] = sigma[order[static_cast<std::size_t>(k)]];
    lambda_s[k] = lambda[order[static_cast<std::size_t>(k)]];
  }
  return MixtureModel(family, std::move(mu_s), std::move(sigma_s), std::move(lambda_s));
}

double MixtureModel::component_pdf(Eigen::Index k, double x) const {
  return std_pdf(family_, (x - mu_[k]) / sigma_[k]) / sigma_[k];
}

double MixtureModel::component_cdf(Eigen::Index k, double x) const {
  return std_cdf(family_, (x - mu_[k]) / sigma_[k]);
}

MixtureModel MixtureModel::affine(double c, double d) const {
  if (!(c > 0.0)) throw InputError("affine map needs a positive scale factor");
  Vector mu = (c * mu_.array() + d).matrix();
  return MixtureModel(family_, std::move(mu), c * sigma_, lambda_);
}

double mixture_pdf(const MixtureModel& model, double x) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < model.m(); ++k) {
    if (model.lambda()[k] > 0.0) total += model.lambda()[k] * model.component_pdf(k, x);
  }
  return total;
}

double mixture_log_pdf(const MixtureModel& model, double x) {
  // log-sum-exp over the weighted component log densities
  double terms_max = -std::numeric_limits<double>::infinity();
  const auto m = model.m();
  Eigen::VectorXd terms(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double w = model.lambda()[k];
    if (w <= 0.0) {
      terms[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double z = (x - model.mu()[k]) / model.sigma()[k];
    terms[k] = std::log(w) + std_log_pdf(model.family(), z) - std::log(model.sigma()[k]);
    terms_max = std::max(terms_max, terms[k]);
  }
  double s = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (std::isfinite(terms[k])) s += std::exp(terms[k] - terms_max);
  }
  return terms_max + std::log(s);
}

double mixture_cdf(const MixtureModel& model, double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  double total = 0.0;
  for (Eigen::Index k = 0; k < model.m(); ++k) {
    total += model.lambda()[k] * model.component_cdf(k, x);
  }
  return std::clamp(total, 0.0, 1.0);
}

double mixture_median(const MixtureModel& model) {
  const double reach = 10.0 * model.sigma().maxCoeff() * std::tan(std::numbers::pi * 0.499);
  double lo = model.mu().minCoeff() - reach;
  double hi = model.mu().maxCoeff() + reach;
  const auto f = [&](double x) { return mixture_cdf(model, x) - 0.5; };
  double width = hi - lo;
  while (f(lo) > 0.0) {
    width *= 2.0;
    lo -= width;
  }
  while (f(hi) < 0.0) {
    width *= 2.0;
    hi += width;
  }

  // Bisection until Newton is safe, then safeguarded Newton.
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double slope = mixture_pdf(model, x);
    double next = slope > 0.0 ? x - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 1e-13 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-13 * std::max(1.0, std::abs(x))) {
      break;
    }
  }
  return x;
}

std::vector<double> sample(const MixtureModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("sample: n must be positive");
  Rng rng(seed);
  const auto m = model.m();
  std::vector<double> cumulative(static_cast<std::size_t>(m));
  double acc = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    acc += model.lambda()[k];
    cumulative[static_cast<std::size_t>(k)] = acc;
  }
  cumulative.back() = 1.0;

  std::vector<double> out(n);
  for (auto& x : out) {
    const double u_component = uniform01(rng);
    const double u_value = uniform01(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u_component);
    auto k = static_cast<Eigen::Index>(std::min<std::ptrdiff_t>(it - cumulative.begin(), m - 1));
    // skip zero-weight components that upper_bound can land on at ties
    while (model.lambda()[k] <= 0.0 && k + 1 < m) ++k;
    x = model.mu()[k] + model.sigma()[k] * std_quantile(model.family(), u_value);
  }
  return out;
}

nlohmann::ordered_json to_json(const MixtureModel& model) {
  auto as_list = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::ordered_json j;
  j["family"] = to_string(model.family());
  j["m"] = model.m();
  j["mu"] = as_list(model.mu());
  j["sigma"] = as_list(model.sigma());
  j["lambda"] = as_list(model.lambda());
  return j;
}

MixtureModel model_from_json(const nlohmann::json& j) {
  try {
    const auto family = parse_family(j.at("family").get<std::string>());
    const auto mu = j.at("mu").get<std::vector<double>>();
    const auto sigma = j.at("sigma").get<std::vector<double>>();
    const auto lambda = j.at("lambda").get<std::vector<double>>();
    if (j.contains("m") && j.at("m").get<std::size_t>() != mu.size()) {
      throw InputError("model JSON: 'm' disagrees with the length of 'mu'");
    }
    auto to_vec = [](const std::vector<double>& v) {
      return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    return MixtureModel(family, to_vec(mu), to_vec(sigma), to_vec(lambda));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
}

MixtureModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("model file '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace mixqcd

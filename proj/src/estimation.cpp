#include "mixqcd/estimation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mixqcd/errors.hpp"

namespace mixqcd {

std::string to_string(Method method) { return method == Method::Niqcd ? "NIQCD" : "IQCD"; }

Method parse_method(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "niqcd") return Method::Niqcd;
  if (lower == "iqcd") return Method::Iqcd;
  throw InputError("unknown method '" + text + "'");
}

void FitConfig::validate() const {
  if (!(tau >= 1.0) || !std::isfinite(tau)) throw InputError("tau must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InputError("kappa must be > 0");
  if (max_iter < 1) throw InputError("max_iter must be >= 1");
  if (cp_penalty.kind == Penalty::Kind::Fixed && !(cp_penalty.value > 0.0)) {
    throw InputError("change-point penalty must be > 0");
  }
  if (cp_penalty.kind == Penalty::Kind::Bic && !(cp_penalty.bic_scale > 0.0)) {
    throw InputError("bic penalty scale must be > 0");
  }
}

std::size_t FitConfig::resolved_m_init(std::size_t n) const {
  if (m_init > 0) return m_init;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)))));
}

nlohmann::ordered_json to_json(const FitReport& report) {
  auto j = nlohmann::ordered_json::object();
  const auto model_json = to_json(report.model);
  j["method"] = to_string(report.method);
  j["family"] = model_json["family"];
  j["m"] = model_json["m"];
  j["mu"] = model_json["mu"];
  j["sigma"] = model_json["sigma"];
  j["lambda"] = model_json["lambda"];
  j["nll"] = report.nll;
  j["iterations"] = report.iterations;
  j["elapsed_seconds"] = report.elapsed_seconds;
  return j;
}

Vector init_locations(const SortedSample& sample, std::size_t m_init) {
  const std::size_t n = sample.n();
  if (m_init < 1) throw InputError("init_locations: m_init must be >= 1");
  if (n < m_init + 1) {
    throw InputError("init_locations: need n >= m_init + 1 (n = " + std::to_string(n) +
                     ", m_init = " + std::to_string(m_init) + ")");
  }
  Vector mu(static_cast<Eigen::Index>(m_init));
  for (std::size_t k = 1; k <= m_init; ++k) {
    mu[static_cast<Eigen::Index>(k - 1)] = sample[grid_index(n, k, m_init + 1) - 1];
  }
  return mu;
}

Vector init_scales(const SortedSample& sample, std::size_t m_hat, double tau) {
  const std::size_t n = sample.n();
  if (m_hat < 1) throw InputError("init_scales: m_hat must be >= 1");
  if (n < m_hat + 2) throw InputError("init_scales: need n >= m_hat + 2");
  if (!(tau >= 1.0)) throw InputError("init_scales: tau must be >= 1");
  const double floor_value = sample.range() > 0.0 ? 1e-8 * sample.range() : 1e-8;
  Vector sigma(static_cast<Eigen::Index>(m_hat));
  for (std::size_t k = 1; k <= m_hat; ++k) {
    const double upper = sample[grid_index(n, k + 1, m_hat + 2) - 1];
    const double lower = sample[grid_index(n, k, m_hat + 2) - 1];
    sigma[static_cast<Eigen::Index>(k - 1)] = std::max((upper - lower) / (2.0 * tau), floor_value);
  }
  return sigma;
}

std::size_t cusum_count(const Vector& weights, double epsilon) {
  std::vector<double> w(weights.data(), weights.data() + weights.size());
  std::sort(w.begin(), w.end(), std::greater<>());
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k];
    // compare against the normalized target so unnormalized inputs work too
    if (acc >= (1.0 - epsilon) * total * (1.0 - 1e-12)) return k + 1;
  }
  return w.size();
}

double negative_log_likelihood(const MixtureModel& model, const SortedSample& sample) {
  double total = 0.0;
  for (double x : sample.values()) total -= mixture_log_pdf(model, x);
  return total;
}

namespace {

/// Per-observation component densities for one parameter vector, so a single
/// coordinate move only re-evaluates one column.
class LikelihoodCache {
 public:
  LikelihoodCache(const SortedSample& sample, Family family, const Vector& mu, const Vector& sigma,
                  const Vector& lambda)
      : x_(sample.values()), family_(family), mu_(mu), sigma_(sigma), lambda_(lambda),
        dens_(static_cast<Eigen::Index>(x_.size()), mu.size()) {
    for (Eigen::Index k = 0; k < mu_.size(); ++k) refresh(k);
  }

  const Vector& mu() const { return mu_; }
  const Vector& sigma() const { return sigma_; }
  const Vector& lambda() const { return lambda_; }

  double nll() const { return nll_with(-1, 0.0, 0.0); }

  /// NLL with component k's (mu, sigma) replaced.
  double nll_with(Eigen::Index k, double mu_k, double sigma_k) const {
    double total = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      double f = 0.0;
      for (Eigen::Index j = 0; j < mu_.size(); ++j) {
        if (j == k) {
          f += lambda_[j] * std_pdf(family_, (x_[i] - mu_k) / sigma_k) / sigma_k;
        } else {
          f += lambda_[j] * dens_(row, j);
        }
      }
      if (!(f > 0.0)) return log_space_nll(k, mu_k, sigma_k, lambda_);
      total -= std::log(f);
    }
    return total;
  }

  double nll_with_weights(const Vector& lambda) const {
    double total = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double f = dens_.row(static_cast<Eigen::Index>(i)).dot(lambda);
      if (!(f > 0.0)) return log_space_nll(-1, 0.0, 0.0, lambda);
      total -= std::log(f);
    }
    return total;
  }

  /// d NLL / d lambda_k = -sum_i g_k(x_i) / f(x_i).
  Vector weight_gradient() const {
    Vector grad = Vector::Zero(mu_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const auto row = dens_.row(static_cast<Eigen::Index>(i));
      const double f = row.dot(lambda_);
      if (f > 0.0) grad -= row.transpose() / f;
    }
    return grad;
  }

  void set_component(Eigen::Index k, double mu_k, double sigma_k) {
    mu_[k] = mu_k;
    sigma_[k] = sigma_k;
    refresh(k);
  }
  void set_weights(const Vector& lambda) { lambda_ = lambda; }

 private:
  void refresh(Eigen::Index k) {
    for (std::size_t i = 0; i < x_.size(); ++i) {
      dens_(static_cast<Eigen::Index>(i), k) = std_pdf(family_, (x_[i] - mu_[k]) / sigma_[k]) / sigma_[k];
    }
  }

  // Fallback when linear-space densities underflow.
  double log_space_nll(Eigen::Index k, double mu_k, double sigma_k, const Vector& lambda) const {
    Vector mu = mu_;
    Vector sigma = sigma_;
    if (k >= 0) {
      mu[k] = mu_k;
      sigma[k] = sigma_k;
    }
    double total = 0.0;
    for (double x : x_) {
      double mx = -std::numeric_limits<double>::infinity();
      std::vector<double> terms(static_cast<std::size_t>(mu.size()));
      for (Eigen::Index j = 0; j < mu.size(); ++j) {
        const double t = lambda[j] > 0.0
                             ? std::log(lambda[j]) + std_log_pdf(family_, (x - mu[j]) / sigma[j]) -
                                   std::log(sigma[j])
                             : -std::numeric_limits<double>::infinity();
        terms[static_cast<std::size_t>(j)] = t;
        mx = std::max(mx, t);
      }
      double s = 0.0;
      for (double t : terms) {
        if (std::isfinite(t)) s += std::exp(t - mx);
      }
      total -= mx + std::log(s);
    }
    return total;
  }

  std::span<const double> x_;
  Family family_;
  Vector mu_;
  Vector sigma_;
  Vector lambda_;
  Matrix dens_;
};

struct LineMin {
  double arg;
  double value;
};

/// Golden-section search on [a, b]; returns the best point evaluated.
template <typename F>
LineMin golden_section(F&& f, double a, double b, int iterations) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < iterations; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? LineMin{c, fc} : LineMin{d, fd};
}

constexpr int kGoldenIterations = 40;
constexpr double kSigmaBracket = 10.0;  // search sigma_k in [sigma/10, 10 sigma]
constexpr double kMuBracket = 5.0;      // search mu_k within +-5 sigma_k

}  // namespace

FitReport coordinate_descent(const MixtureModel& start, const SortedSample& sample, const FitConfig& cfg) {
  cfg.validate();
  const auto begin = std::chrono::steady_clock::now();
  const Family family = start.family();
  LikelihoodCache cache(sample, family, start.mu(), start.sigma(), start.lambda());
  double current = cache.nll();
  if (!std::isfinite(current)) throw InputError("coordinate_descent: non-finite NLL at the starting point");

  const double range = sample.range() > 0.0 ? sample.range() : 1.0;
  const double sigma_lo = 1e-8 * range;
  const double sigma_hi = range;
  const double x_lo = sample.min();
  const double x_hi = sample.max();
  const Eigen::Index m = start.m();

  std::vector<double> trace{current};
  double step = 0.5 / static_cast<double>(sample.n());
  int iterations = 0;
  for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
    ++iterations;
    const double previous = current;

    for (Eigen::Index k = 0; k < m; ++k) {
      if (cache.lambda()[k] <= 0.0) continue;
      const double mu_k = cache.mu()[k];
      const double s = cache.sigma()[k];
      const double a = std::log(std::max(sigma_lo, s / kSigmaBracket));
      const double b = std::log(std::min(sigma_hi, s * kSigmaBracket));
      if (!(a < b)) continue;
      const auto best = golden_section([&](double t) { return cache.nll_with(k, mu_k, std::exp(t)); }, a, b,
                                       kGoldenIterations);
      if (best.value < current) {
        cache.set_component(k, mu_k, std::exp(best.arg));
        current = best.value;
      }
    }

    for (Eigen::Index k = 0; k < m; ++k) {
      if (cache.lambda()[k] <= 0.0) continue;
      const double s = cache.sigma()[k];
      const double a = std::max(x_lo, cache.mu()[k] - kMuBracket * s);
      const double b = std::min(x_hi, cache.mu()[k] + kMuBracket * s);
      if (!(a < b)) continue;
      const auto best =
          golden_section([&](double t) { return cache.nll_with(k, t, s); }, a, b, kGoldenIterations);
      if (best.value < current) {
        cache.set_component(k, best.arg, s);
        current = best.value;
      }
    }

    if (m > 1) {
      // projected gradient on the simplex, halving the step until the NLL
      // does not increase
      for (int pg = 0; pg < 25; ++pg) {
        const Vector grad = cache.weight_gradient();
        bool accepted = false;
        double trial_step = step * 2.0;
        for (int halving = 0; halving < 40; ++halving) {
          const Vector trial = project_to_simplex(cache.lambda() - trial_step * grad);
          const double value = cache.nll_with_weights(trial);
          if (value <= current) {
            const double gain = current - value;
            cache.set_weights(trial);
            current = value;
            step = trial_step;
            accepted = gain > 1e-12 * std::abs(current);
            break;
          }
          trial_step *= 0.5;
        }
        if (!accepted) break;
      }
    }

    trace.push_back(current);
    if (std::abs(previous - current) <= cfg.kappa * std::abs(previous)) break;
  }

  FitReport report{MixtureModel::sorted(family, cache.mu(), cache.sigma(), cache.lambda())};
  report.nll = current;
  report.nll_trace = std::move(trace);
  report.iterations = iterations;
  report.method = Method::Niqcd;
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  return report;
}

Vector initial_locations(const SortedSample& sample, const FitConfig& cfg) {
  const Vector grid = init_locations(sample, cfg.resolved_m_init(sample.n()));
  const std::span<const double> seq(grid.data(), static_cast<std::size_t>(grid.size()));
  const Segmentation seg = detect_changepoints(seq, cfg.cp_penalty);
  const std::vector<double> mu = collapse_locations(seq, seg);
  return Eigen::Map<const Vector>(mu.data(), static_cast<Eigen::Index>(mu.size()));
}

FitReport fit_niqcd(const SortedSample& sample, const FitConfig& cfg, Family family) {
  cfg.validate();
  if (sample.n() < 10) throw InputError("fit_niqcd: need at least 10 observations");
  const auto begin = std::chrono::steady_clock::now();

  const Vector mu = initial_locations(sample, cfg);
  const auto m_hat = static_cast<std::size_t>(mu.size());
  const Vector sigma = init_scales(sample, m_hat, cfg.tau);
  const WeightSystem sys = build_weight_system(sample, mu, sigma, family);
  const WeightSolution weights = solve_weights(sys.A, sys.b, cfg.weight_mode);

  MixtureModel start(family, mu, sigma, weights.lambda);
  FitReport report{start};
  if (cfg.refine) {
    report = coordinate_descent(start, sample, cfg);
  } else {
    report.nll = negative_log_likelihood(start, sample);
    report.nll_trace = {report.nll};
    report.iterations = 0;
  }
  report.method = Method::Niqcd;
  report.weight_fallback = weights.fell_back_to_uniform;
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  return report;
}

namespace {

/// Row-normalized responsibilities p(i, k) proportional to
/// lambda_k g((x_i - mu_k) / sigma_k) / sigma_k, computed in log space.
Matrix responsibilities(std::span<const double> x, Family family, const Vector& mu, const Vector& sigma,
                        const Vector& lambda) {
  const Eigen::Index m = mu.size();
  Matrix p(static_cast<Eigen::Index>(x.size()), m);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m; ++k) {
      const double t = lambda[k] > 0.0 ? std::log(lambda[k]) +
                                             std_log_pdf(family, (x[i] - mu[k]) / sigma[k]) -
                                             std::log(sigma[k])
                                       : -std::numeric_limits<double>::infinity();
      p(row, k) = t;
      mx = std::max(mx, t);
    }
    double s = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      p(row, k) = std::isfinite(p(row, k)) ? std::exp(p(row, k) - mx) : 0.0;
      s += p(row, k);
    }
    p.row(row) /= s;
  }
  return p;
}

struct IqcdSnapshot {
  Vector mu;
  Vector sigma;
  Vector lambda;
  std::size_t m_hat;
};

}  // namespace

FitReport fit_iqcd(const SortedSample& sample, const FitConfig& cfg, Family family) {
  cfg.validate();
  const std::size_t n = sample.n();
  if (n < 10) throw InputError("fit_iqcd: need at least 10 observations");
  const auto begin = std::chrono::steady_clock::now();
  const auto x = sample.values();
  const double sigma_floor = sample.range() > 0.0 ? 1e-8 * sample.range() : 1e-8;

  Vector mu = initial_locations(sample, cfg);
  const Eigen::Index m0 = mu.size();
  Vector sigma = init_scales(sample, static_cast<std::size_t>(m0), cfg.tau);

  // Boundary-aware eCDF differences between neighbouring midpoints.
  Vector lambda(m0);
  if (m0 == 1) {
    lambda[0] = 1.0;
  } else {
    for (Eigen::Index k = 0; k < m0; ++k) {
      const double upper = k + 1 < m0 ? ecdf(sample, 0.5 * (mu[k + 1] + mu[k])) : ecdf(sample, sample.max());
      const double lower = k > 0 ? ecdf(sample, 0.5 * (mu[k] + mu[k - 1])) : ecdf(sample, sample.min());
      lambda[k] = std::max(0.0, upper - lower);
    }
    if (!(lambda.sum() > 0.0)) lambda.setConstant(1.0 / static_cast<double>(m0));
  }

  Matrix p = responsibilities(x, family, mu, sigma, lambda);
  std::vector<IqcdSnapshot> history;
  int iterations = 0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    ++iterations;
    const Eigen::Index m = mu.size();
    std::vector<std::vector<double>> members(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Index arg = 0;
      p.row(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
      members[static_cast<std::size_t>(arg)].push_back(x[i]);
    }
    const Vector mean_resp = p.colwise().mean().transpose();

    std::vector<double> new_mu, new_sigma, new_lambda;
    for (Eigen::Index k = 0; k < m; ++k) {
      auto& group = members[static_cast<std::size_t>(k)];
      if (group.empty()) continue;  // empty component is dropped
      const MedianIqr summary = median_iqr(std::move(group));
      new_mu.push_back(summary.median);
      new_sigma.push_back(std::max(summary.iqr, sigma_floor));
      new_lambda.push_back(mean_resp[k]);
    }
    const auto kept = static_cast<Eigen::Index>(new_mu.size());
    Vector next_lambda = Eigen::Map<const Vector>(new_lambda.data(), kept);
    next_lambda /= next_lambda.sum();
    const bool same_size = kept == m;
    const double lambda_change =
        same_size ? (next_lambda - lambda).cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity();

    mu = Eigen::Map<const Vector>(new_mu.data(), kept);
    sigma = Eigen::Map<const Vector>(new_sigma.data(), kept);
    lambda = next_lambda;
    p = responsibilities(x, family, mu, sigma, lambda);

    const std::size_t m_hat = cusum_count(lambda, cfg.epsilon);
    const bool stable = !history.empty() && history.back().m_hat == m_hat && lambda_change < 1e-6;
    history.push_back({mu, sigma, lambda, m_hat});
    if (stable) break;
  }

  // Modal component count; ties go to the smaller count.
  std::map<std::size_t, int> votes;
  for (const auto& snap : history) ++votes[snap.m_hat];
  std::size_t mode = 0;
  int mode_votes = -1;
  for (const auto& [count, v] : votes) {
    if (v > mode_votes) {
      mode = count;
      mode_votes = v;
    }
  }

  const auto mode_size = static_cast<Eigen::Index>(mode);
  Vector mu_avg = Vector::Zero(mode_size);
  Vector sigma_avg = Vector::Zero(mode_size);
  Vector lambda_avg = Vector::Zero(mode_size);
  int used = 0;
  for (const auto& snap : history) {
    if (snap.m_hat != mode) continue;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(snap.lambda.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return snap.lambda[a] > snap.lambda[b]; });
    order.resize(mode);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return snap.mu[a] < snap.mu[b] || (snap.mu[a] == snap.mu[b] && a < b);
    });
    for (Eigen::Index k = 0; k < mode_size; ++k) {
      mu_avg[k] += snap.mu[order[static_cast<std::size_t>(k)]];
      sigma_avg[k] += snap.sigma[order[static_cast<std::size_t>(k)]];
      lambda_avg[k] += snap.lambda[order[static_cast<std::size_t>(k)]];
    }
    ++used;
  }
  mu_avg /= used;
  sigma_avg /= used;
  lambda_avg /= lambda_avg.sum();

  FitReport report{MixtureModel::sorted(family, mu_avg, sigma_avg, lambda_avg)};
  report.nll = negative_log_likelihood(report.model, sample);
  report.nll_trace = {report.nll};
  report.iterations = iterations;
  report.method = Method::Iqcd;
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  return report;
}

FitReport fit(const SortedSample& sample, const FitConfig& cfg, Family family, Method method) {
  return method == Method::Niqcd ? fit_niqcd(sample, cfg, family) : fit_iqcd(sample, cfg, family);
}

}  // namespace mixqcd

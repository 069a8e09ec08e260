#include "mixqcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mixqcd/errors.hpp"

namespace mixqcd {

namespace {

constexpr int kMaxDepth = 60;

struct SimpsonState {
  const std::function<double(double)>& h;
  double error = 0.0;
  bool failed = false;
};

double simpson(double fa, double fm, double fb, double width) { return width / 6.0 * (fa + 4.0 * fm + fb); }

double adaptive(SimpsonState& st, double a, double b, double fa, double fm, double fb, double whole, double eps,
                int depth) {
  if (st.failed) return whole;  // one panel already hit the limit; the result is partial anyway
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.h(lm);
  const double frm = st.h(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double diff = left + right - whole;
  const double refined = left + right + diff / 15.0;
  if (std::abs(diff) <= 15.0 * eps || std::abs(diff) <= 1e-15 * std::abs(refined)) {
    st.error += std::abs(diff) / 15.0;
    return refined;
  }
  if (depth >= kMaxDepth) {
    st.failed = true;
    st.error += std::abs(diff) / 15.0;
    return refined;
  }
  return adaptive(st, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
         adaptive(st, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
}

std::vector<double> component_features(const MixtureModel& model) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k < model.m(); ++k) {
    for (double s : {-3.0, -1.0, 0.0, 1.0, 3.0}) out.push_back(model.mu()[k] + s * model.sigma()[k]);
  }
  return out;
}

}  // namespace

Integral integrate_real_line(const std::function<double(double)>& f, double abs_tol,
                             std::span<const double> features) {
  if (!(abs_tol > 0.0)) throw InputError("integrate_real_line: abs_tol must be positive");
  constexpr double half_pi = std::numbers::pi / 2.0;
  const std::function<double(double)> h = [&f](double theta) {
    const double x = std::tan(theta);
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * (1.0 + x * x);
  };

  constexpr int kUniformPanels = 32;
  std::vector<double> cuts;
  for (int i = 0; i <= kUniformPanels; ++i) cuts.push_back(-half_pi + std::numbers::pi * i / kUniformPanels);
  for (double x : features) {
    if (std::isfinite(x)) cuts.push_back(std::atan(x));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             cuts.end());

  SimpsonState st{h};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const double fa = h(a);
    const double fb = h(b);
    const double fm = h(0.5 * (a + b));
    const double eps = abs_tol * (b - a) / std::numbers::pi;
    total += adaptive(st, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), eps, 0);
  }
  if (st.failed) {
    throw IntegrationError("integrate_real_line: no convergence within depth 60", total, st.error);
  }
  return {total, st.error};
}

double dol(const ComponentDensity& g1, const ComponentDensity& g2, double abs_tol) {
  const std::vector<double> features{g1.mu - g1.sigma, g1.mu, g1.mu + g1.sigma,
                                     g2.mu - g2.sigma, g2.mu, g2.mu + g2.sigma};
  const auto r = integrate_real_line([&](double x) { return std::min(g1(x), g2(x)); }, abs_tol, features);
  return std::clamp(r.value, 0.0, 1.0);
}

namespace {

Integral wdol_integral(const MixtureModel& model, double abs_tol) {
  const auto features = component_features(model);
  return integrate_real_line(
      [&](double x) {
        double lowest = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < model.m(); ++k) {
          lowest = std::min(lowest, model.lambda()[k] * model.component_pdf(k, x));
        }
        return lowest;
      },
      abs_tol, features);
}

}  // namespace

double wdol(const MixtureModel& model, double abs_tol) {
  const double min_weight = model.lambda().minCoeff();
  if (!(min_weight > 0.0)) throw InputError("wdol: every weight must be positive");
  return std::clamp(wdol_integral(model, abs_tol * min_weight).value / min_weight, 0.0, 1.0);
}

std::optional<double> bcd(const MixtureModel& model) {
  const double v = std_variance(model.family());
  if (!std::isfinite(v)) return std::nullopt;
  const auto& lambda = model.lambda();
  const auto& mu = model.mu();
  const double mean = lambda.dot(mu);
  const double between = lambda.dot(mu.cwiseProduct(mu)) - mean * mean;
  const double within = v * lambda.dot(model.sigma().cwiseProduct(model.sigma()));
  const double total = within + std::max(0.0, between);
  return std::clamp(std::max(0.0, between) / total, 0.0, 1.0);
}

RbcdResult rbcd(const MixtureModel& model, std::size_t mc_n, std::uint64_t seed) {
  if (mc_n < 1000) throw InputError("rbcd: mc_n must be at least 1000");
  const double med = mixture_median(model);
  double numerator = 0.0;
  for (Eigen::Index k = 0; k < model.m(); ++k) numerator += model.lambda()[k] * std::abs(model.mu()[k] - med);
  const auto draws = sample(model, mc_n, seed);
  double denominator = 0.0;
  for (double x : draws) denominator += std::abs(x - med);
  denominator /= static_cast<double>(mc_n);
  return {numerator / denominator, !std::isfinite(std_variance(model.family()))};
}

OverlapReport overlap_report(const MixtureModel& model, std::size_t mc_n, std::uint64_t seed, double abs_tol) {
  OverlapReport out{};
  if (model.m() == 2) {
    out.dol = dol({model.family(), model.mu()[0], model.sigma()[0]},
                  {model.family(), model.mu()[1], model.sigma()[1]}, abs_tol);
  }
  const double min_weight = model.lambda().minCoeff();
  if (!(min_weight > 0.0)) throw InputError("wdol: every weight must be positive");
  const auto integral = wdol_integral(model, abs_tol * min_weight);
  out.wdol = std::clamp(integral.value / min_weight, 0.0, 1.0);
  out.quadrature_abs_err = integral.error_estimate / min_weight;
  out.bcd = bcd(model);
  out.rbcd = rbcd(model, mc_n, seed);
  return out;
}

nlohmann::ordered_json to_json(const OverlapReport& report) {
  nlohmann::ordered_json j;
  if (report.dol) {
    j["dol"] = *report.dol;
  } else {
    j["dol"] = nullptr;
  }
  j["wdol"] = report.wdol;
  if (report.bcd) {
    j["bcd"] = *report.bcd;
  } else {
    j["bcd"] = "undefined-heavy-tail";
  }
  j["rbcd"] = report.rbcd.value;
  j["rbcd_flag"] = report.rbcd.divergent_denominator ? "divergent-denominator" : "none";
  j["quadrature_abs_err"] = report.quadrature_abs_err;
  return j;
}

}  // namespace mixqcd

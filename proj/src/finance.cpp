#include "mixqcd/finance.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "mixqcd/errors.hpp"
#include "mixqcd/parallel.hpp"

namespace mixqcd {

ReturnSeries to_returns(const PriceSeries& prices, double scale) {
  if (prices.closes.size() < 2) throw InputError("need at least two prices to form a return");
  const auto r = log_returns(prices.closes);
  ReturnSeries out;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.returns.reserve(r.size());
  for (double v : r) out.returns.push_back(scale * v);
  return out;
}

ReturnSeries ingest_prices(const std::string& csv_path, double scale) {
  return to_returns(read_price_csv(csv_path), scale);
}

ReturnSeries slice(const ReturnSeries& series, Date from, Date to) {
  ReturnSeries out;
  for (std::size_t t = 0; t < series.dates.size(); ++t) {
    if (series.dates[t] >= from && series.dates[t] <= to) {
      out.dates.push_back(series.dates[t]);
      out.returns.push_back(series.returns[t]);
    }
  }
  return out;
}

CategorySeries classify(const MixtureModel& model, const ReturnSeries& returns, bool weighted) {
  CategorySeries out;
  out.dates = returns.dates;
  out.named = model.m() == 3;
  out.categories.reserve(returns.returns.size());
  for (double r : returns.returns) {
    Eigen::Index arg = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < model.m(); ++k) {
      const double z = (r - model.mu()[k]) / model.sigma()[k];
      double score = std_log_pdf(model.family(), z) - std::log(model.sigma()[k]);
      if (weighted) {
        score += model.lambda()[k] > 0.0 ? std::log(model.lambda()[k]) : -std::numeric_limits<double>::infinity();
      }
      if (score > best) {
        best = score;
        arg = k;
      }
    }
    out.categories.push_back(out.named ? static_cast<int>(arg) - 1 : static_cast<int>(arg) + 1);
  }
  return out;
}

std::vector<WeeklyFit> weekly_refit(const ReturnSeries& returns, Date start, const FitConfig& cfg, Family family,
                                    std::size_t threads) {
  if (returns.dates.empty()) throw InputError("weekly_refit: empty return series");
  if (start < returns.dates.front() || start > returns.dates.back()) {
    throw InputError("weekly_refit: start date " + format_date(start) + " is outside the return series");
  }
  const auto before = std::lower_bound(returns.dates.begin(), returns.dates.end(), start) - returns.dates.begin();
  if (before < 30) throw InputError("weekly_refit: need at least 30 returns before the start date");

  // (snapped date, number of returns up to it) per boundary
  std::vector<std::pair<Date, std::size_t>> cuts;
  for (Date boundary = start; boundary <= returns.dates.back(); boundary += std::chrono::days{7}) {
    const auto end = std::upper_bound(returns.dates.begin(), returns.dates.end(), boundary) - returns.dates.begin();
    cuts.emplace_back(returns.dates[static_cast<std::size_t>(end - 1)], static_cast<std::size_t>(end));
  }

  std::vector<std::optional<WeeklyFit>> fits(cuts.size());
  parallel_for(cuts.size(), threads, [&](std::size_t i) {
    std::vector<double> window(returns.returns.begin(),
                               returns.returns.begin() + static_cast<std::ptrdiff_t>(cuts[i].second));
    fits[i] = WeeklyFit{cuts[i].first, fit_niqcd(SortedSample(std::move(window)), cfg, family)};
  });
  std::vector<WeeklyFit> out;
  out.reserve(fits.size());
  for (auto& f : fits) out.push_back(std::move(*f));
  return out;
}

std::string trajectory_csv(const std::vector<WeeklyFit>& fits) {
  std::string csv = "date,mu1,mu2,mu3,sigma1,sigma2,sigma3,lambda1,lambda2,lambda3\n";
  for (const auto& f : fits) {
    csv += format_date(f.date);
    const auto& model = f.report.model;
    for (const Vector* v : {&model.mu(), &model.sigma(), &model.lambda()}) {
      for (Eigen::Index k = 0; k < 3; ++k) {
        csv += ',';
        if (k < v->size()) csv += fmt::format("{}", (*v)[k]);
      }
    }
    csv += '\n';
  }
  return csv;
}

std::string category_csv(const CategorySeries& series) {
  std::string csv = "date,category\n";
  for (std::size_t t = 0; t < series.dates.size(); ++t) {
    csv += fmt::format("{},{}\n", format_date(series.dates[t]), series.categories[t]);
  }
  return csv;
}

}  // namespace mixqcd

#pragma once

#include <string>
#include <vector>

#include "mixqcd/empirical.hpp"
#include "mixqcd/estimation.hpp"

namespace mixqcd {

/// Daily log returns, optionally multiplied by 100. dates[t] is the date of
/// the close that ends return t.
struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<double> returns;
};

ReturnSeries to_returns(const PriceSeries& prices, double scale = 100.0);
ReturnSeries ingest_prices(const std::string& csv_path, double scale = 100.0);

/// Sub-series with date in [from, to].
ReturnSeries slice(const ReturnSeries& series, Date from, Date to);

struct CategorySeries {
  std::vector<Date> dates;
  std::vector<int> categories;
  /// True when categories are bear/neutral/bull (-1, 0, 1); false when the
  /// model does not have three components and raw 1-based indices are used.
  bool named = true;
};

/// Per-day regime: the component with the largest weighted density
/// lambda_k g_k(r) (or the unweighted g_k(r)), ties toward the lower index.
CategorySeries classify(const MixtureModel& model, const ReturnSeries& returns, bool weighted = true);

struct WeeklyFit {
  Date date;  ///< last trading day at or before the week boundary
  FitReport report;
};

/// Refits NIQCD on all returns up to each week boundary start, start + 7d,
/// ... not past the last return. Boundaries snap back to the last available
/// trading day. Fits are independent and may run on `threads` workers.
std::vector<WeeklyFit> weekly_refit(const ReturnSeries& returns, Date start, const FitConfig& cfg,
                                    Family family = Family::Cauchy, std::size_t threads = 1);

/// `date,mu1..mu3,sigma1..sigma3,lambda1..lambda3`; missing components are
/// left blank, components beyond the third are omitted.
std::string trajectory_csv(const std::vector<WeeklyFit>& fits);

/// `date,category`
std::string category_csv(const CategorySeries& series);

}  // namespace mixqcd

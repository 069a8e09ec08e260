#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mixqcd {

/// Immutable ascending sample of finite observations.
class SortedSample {
 public:
  explicit SortedSample(std::vector<double> values);

  std::size_t n() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }
  double range() const noexcept { return values_.back() - values_.front(); }

  /// x_(idx), 1-based.
  double order_stat(std::size_t idx) const;

 private:
  std::vector<double> values_;
};

/// F_n(y): fraction of observations <= y.
double ecdf(const SortedSample& sample, double y);

/// floor(numerator / denominator) clamped to [1, n]; the bracket convention
/// used for every quantile-grid index.
std::size_t grid_index(std::size_t n, std::size_t numerator_k, std::size_t denominator);

/// x_(idx) with idx clamped into [1, n].
double order_quantile(const SortedSample& sample, std::ptrdiff_t idx);

struct MedianIqr {
  double median;
  double iqr;
};

/// Median and interquartile range (linear interpolation between order
/// statistics, "type 7").
MedianIqr median_iqr(std::vector<double> values);

/// Type-7 quantile of an ascending range.
double quantile_type7(std::span<const double> sorted, double p);

struct SkewKurt {
  double skewness;         ///< m3 / m2^{3/2}
  double excess_kurtosis;  ///< m4 / m2^2 - 3
};

SkewKurt skewness_kurtosis(std::span<const double> values);

/// r_t = ln(p_t / p_{t-1}).
std::vector<double> log_returns(std::span<const double> prices);

using Date = std::chrono::sys_days;

Date parse_date(const std::string& text);
std::string format_date(Date d);

struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> closes;
};

/// Reads a `date,close` CSV. Blank lines are skipped; anything else that does
/// not parse, a non-positive close or a non-increasing date is an InputError
/// naming the line.
PriceSeries read_price_csv(const std::string& path);

/// Reads a single numeric column (optional non-numeric header line).
std::vector<double> read_column_csv(const std::string& path);

}  // namespace mixqcd

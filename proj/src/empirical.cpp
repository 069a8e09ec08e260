#include "mixqcd/empirical.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mixqcd/errors.hpp"

namespace mixqcd {

SortedSample::SortedSample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InputError("sample must be non-empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InputError("sample contains a non-finite value at position " + std::to_string(i + 1));
    }
  }
  std::sort(values_.begin(), values_.end());
}

double SortedSample::order_stat(std::size_t idx) const {
  if (idx < 1 || idx > values_.size()) throw InputError("order statistic index out of range");
  return values_[idx - 1];
}

double ecdf(const SortedSample& sample, double y) {
  const auto v = sample.values();
  const auto count = std::upper_bound(v.begin(), v.end(), y) - v.begin();
  return static_cast<double>(count) / static_cast<double>(v.size());
}

std::size_t grid_index(std::size_t n, std::size_t numerator_k, std::size_t denominator) {
  const std::size_t idx = (n * numerator_k) / denominator;
  return std::clamp<std::size_t>(idx, 1, n);
}

double order_quantile(const SortedSample& sample, std::ptrdiff_t idx) {
  const auto n = static_cast<std::ptrdiff_t>(sample.n());
  return sample[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 1, n) - 1)];
}

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of an empty range");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MedianIqr median_iqr(std::vector<double> values) {
  if (values.empty()) throw InputError("median_iqr: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  const double iqr = quantile_type7(values, 0.75) - quantile_type7(values, 0.25);
  return {median, std::max(0.0, iqr)};
}

SkewKurt skewness_kurtosis(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 3) throw InputError("skewness/kurtosis need at least three observations");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (!(m2 > 0.0)) throw InputError("skewness/kurtosis of a constant sample are undefined");
  return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

std::vector<double> log_returns(std::span<const double> prices) {
  if (prices.size() < 2) throw InputError("log_returns needs at least two prices");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      throw InputError("non-positive price at index " + std::to_string(i + 1));
    }
  }
  std::vector<double> out(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) out[t - 1] = std::log(prices[t] / prices[t - 1]);
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Date parse_date(const std::string& text) {
  const std::string t = trim(text);
  int y = 0;
  unsigned mo = 0, d = 0;
  if (t.size() != 10 || t[4] != '-' || t[7] != '-') throw InputError("malformed date '" + t + "'");
  const auto digits = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto [ptr, ec] = std::from_chars(t.data() + pos, t.data() + pos + len, out);
    return ec == std::errc() && ptr == t.data() + pos + len;
  };
  if (!digits(0, 4, y) || !digits(5, 2, mo) || !digits(8, 2, d)) {
    throw InputError("malformed date '" + t + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
  if (!ymd.ok()) throw InputError("invalid calendar date '" + t + "'");
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

PriceSeries read_price_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open price file '" + path + "'");
  PriceSeries out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      if (t != "date,close") {
        throw InputError(path + ":" + std::to_string(line_no) + ": expected header 'date,close'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected two fields");
    }
    Date date;
    try {
      date = parse_date(t.substr(0, comma));
    } catch (const InputError& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    double close = 0.0;
    if (!parse_double(t.substr(comma + 1), close) || !std::isfinite(close)) {
      throw InputError(path + ":" + std::to_string(line_no) + ": malformed close price");
    }
    if (!(close > 0.0)) {
      throw InputError(path + ":" + std::to_string(line_no) + ": non-positive close price");
    }
    if (!out.dates.empty() && !(date > out.dates.back())) {
      throw InputError(path + ":" + std::to_string(line_no) + ": dates must be strictly increasing");
    }
    out.dates.push_back(date);
    out.closes.push_back(close);
  }
  if (!header_seen) throw InputError(path + ": empty price file");
  return out;
}

std::vector<double> read_column_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path + "'");
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    double v = 0.0;
    if (!parse_double(t, v)) {
      if (first_content) {  // header
        first_content = false;
        continue;
      }
      throw InputError(path + ":" + std::to_string(line_no) + ": malformed value '" + t + "'");
    }
    if (!std::isfinite(v)) throw InputError(path + ":" + std::to_string(line_no) + ": non-finite value");
    first_content = false;
    out.push_back(v);
  }
  if (out.empty()) throw InputError(path + ": no observations");
  return out;
}

}  // namespace mixqcd

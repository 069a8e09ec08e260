#include "mixqcd/changepoint.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixqcd/empirical.hpp"
#include "mixqcd/errors.hpp"

namespace mixqcd {

MeanShiftCost::MeanShiftCost(std::span<const double> seq)
    : sum_(seq.size() + 1, 0.0), sum_sq_(seq.size() + 1, 0.0) {
  const double center =
      seq.empty() ? 0.0 : std::accumulate(seq.begin(), seq.end(), 0.0) / static_cast<double>(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const double v = seq[t] - center;
    sum_[t + 1] = sum_[t] + v;
    sum_sq_[t + 1] = sum_sq_[t] + v * v;
  }
}

double MeanShiftCost::operator()(std::size_t i, std::size_t j) const {
  const double len = static_cast<double>(j - i + 1);
  const double s = sum_[j] - sum_[i - 1];
  const double ss = sum_sq_[j] - sum_sq_[i - 1];
  return std::max(0.0, ss - s * s / len);
}

double segment_mean_cost(std::span<const double> seq, std::size_t i, std::size_t j) {
  if (i < 1 || i > j || j > seq.size()) throw InputError("segment_mean_cost: need 1 <= i <= j <= M");
  return MeanShiftCost(seq)(i, j);
}

Penalty Penalty::parse(const std::string& text, double bic_scale) {
  if (text == "bic" || text == "BIC") return bic(bic_scale);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw InputError("change-point penalty must be 'bic' or a positive number, got '" + text + "'");
  }
  return fixed(v);
}

double Penalty::resolve(std::span<const double> seq) const {
  if (kind == Kind::Fixed) return value;
  const std::size_t m = seq.size();
  if (m < 2) return 0.0;
  const double mean = std::accumulate(seq.begin(), seq.end(), 0.0) / static_cast<double>(m);
  double var = 0.0;
  for (double v : seq) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m);
  return bic_scale * std::max(var, 1e-12) * std::log(static_cast<double>(m));
}

std::string Penalty::describe() const {
  if (kind == Kind::Fixed) return std::to_string(value);
  return "bic";
}

Segmentation detect_changepoints(std::span<const double> seq, const Penalty& penalty) {
  return detect_changepoints(seq, penalty.resolve(seq));
}

Segmentation detect_changepoints(std::span<const double> seq, double beta) {
  const std::size_t m = seq.size();
  if (m == 0) throw InputError("detect_changepoints: empty sequence");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InputError("detect_changepoints: penalty must be >= 0");
  const MeanShiftCost cost(seq);

  // best[t]: optimal penalized cost of seq[1..t]; last[t]: start of its final
  // segment minus one.
  std::vector<double> best(m + 1, 0.0);
  std::vector<std::size_t> last(m + 1, 0);
  best[0] = -beta;
  std::vector<std::size_t> candidates{0};
  std::vector<double> scratch;
  for (std::size_t t = 1; t <= m; ++t) {
    double min_value = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    scratch.resize(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const std::size_t s = candidates[c];
      scratch[c] = best[s] + cost(s + 1, t);
      const double v = scratch[c] + beta;
      if (v < min_value) {
        min_value = v;
        arg = s;
      }
    }
    best[t] = min_value;
    last[t] = arg;
    // PELT: s can never again be optimal once best[s] + C(s+1..t) > best[t]
    // (the mean-shift cost is superadditive, so K = 0).
    std::vector<std::size_t> kept;
    kept.reserve(candidates.size() + 1);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (scratch[c] <= best[t]) kept.push_back(candidates[c]);
    }
    kept.push_back(t);
    candidates = std::move(kept);
  }

  Segmentation seg;
  seg.cost = best[m];
  for (std::size_t t = m; t > 0; t = last[t]) seg.breakpoints.push_back(t);
  std::reverse(seg.breakpoints.begin(), seg.breakpoints.end());
  return seg;
}

std::vector<double> collapse_locations(std::span<const double> mu_init, const Segmentation& seg) {
  if (seg.breakpoints.empty() || seg.breakpoints.back() != mu_init.size()) {
    throw InputError("collapse_locations: segmentation does not cover the sequence");
  }
  std::vector<double> out;
  out.reserve(seg.breakpoints.size());
  std::size_t start = 0;
  for (std::size_t end : seg.breakpoints) {
    if (end <= start) throw InputError("collapse_locations: empty segment");
    std::vector<double> part(mu_init.begin() + static_cast<std::ptrdiff_t>(start),
                             mu_init.begin() + static_cast<std::ptrdiff_t>(end));
    out.push_back(median_iqr(std::move(part)).median);
    start = end;
  }
  return out;
}

}  // namespace mixqcd

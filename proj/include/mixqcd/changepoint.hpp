#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mixqcd {

/// Within-segment sum of squared deviations from the segment mean, answered
/// in O(1) from prefix sums. The sequence is centered first so shifting the
/// input does not change rounding in the sums.
class MeanShiftCost {
 public:
  explicit MeanShiftCost(std::span<const double> seq);

  std::size_t size() const noexcept { return sum_.size() - 1; }
  /// Cost of the closed 1-based segment [i, j].
  double operator()(std::size_t i, std::size_t j) const;

 private:
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
};

double segment_mean_cost(std::span<const double> seq, std::size_t i, std::size_t j);

/// Penalty added per extra segment. The "bic" kind scales with the data:
///   beta = bic_scale * max(var(seq), 1e-12) * log(M).
struct Penalty {
  enum class Kind { Bic, Fixed };
  Kind kind = Kind::Bic;
  double value = 0.0;       ///< beta, Fixed only
  double bic_scale = 0.6;   ///< multiplier, Bic only

  static Penalty bic(double scale = 0.6) { return {Kind::Bic, 0.0, scale}; }
  static Penalty fixed(double beta) { return {Kind::Fixed, beta, 0.6}; }
  /// Parses "bic" or a positive number.
  static Penalty parse(const std::string& text, double bic_scale = 0.6);

  double resolve(std::span<const double> seq) const;
  std::string describe() const;
};

struct Segmentation {
  /// 1-based last index of every segment; the final entry is M.
  std::vector<std::size_t> breakpoints;
  /// sum of segment costs + beta * (segments - 1)
  double cost = 0.0;

  std::size_t segments() const noexcept { return breakpoints.size(); }
};

/// Exact penalized segmentation by optimal partitioning with PELT pruning.
/// Ties resolve to the earliest previous breakpoint, so the result is
/// deterministic.
Segmentation detect_changepoints(std::span<const double> seq, const Penalty& penalty);
Segmentation detect_changepoints(std::span<const double> seq, double beta);

/// One location per segment: the median of the segment's entries.
std::vector<double> collapse_locations(std::span<const double> mu_init, const Segmentation& seg);

}  // namespace mixqcd

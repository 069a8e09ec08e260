#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mixqcd/estimation.hpp"
#include "mixqcd/mixture.hpp"

namespace mixqcd {

enum class SettingId { S1 = 1, S2, S3, S4, S5, S6 };

std::string to_string(SettingId id);
SettingId parse_setting(const std::string& text);
const std::vector<SettingId>& all_settings();

/// A true three-component Cauchy generator.
struct Setting {
  SettingId id;
  MixtureModel model;
};

/// The six benchmark generators: high / medium / low separation, each with
/// equal (0.33, 0.33, 0.34) and unequal (0.2, 0.3, 0.5) weights.
Setting make_setting(SettingId id);

struct ExperimentResult {
  SettingId setting = SettingId::S1;
  Method method = Method::Niqcd;
  std::size_t n = 0;
  std::size_t reps = 0;
  double detection_rate = 0.0;
  /// m-hat -> count; failed replicates are counted under 0.
  std::map<std::size_t, std::size_t> mhat_histogram;
  double p_mean = 0.0;
  double p_se = 0.0;
  double time_mean_s = 0.0;
  double time_se_s = 0.0;
};

struct ExperimentOptions {
  std::size_t threads = 1;
  /// Record zero fit time so reports are byte-stable across runs.
  bool record_timing = true;
};

/// Replicate r samples with seed base_seed + r, fits, and records m-hat, the
/// asymptotic AD p-value of the fit and the wall time of the fit call alone.
ExperimentResult run_experiment(const Setting& setting, Method method, std::size_t n, std::size_t reps,
                                std::uint64_t base_seed, const FitConfig& cfg,
                                const ExperimentOptions& options = {});

/// Mean and standard error s / sqrt(k) of a list (se = 0 when k < 2).
std::pair<double, double> mean_and_se(const std::vector<double>& values);

/// Writes `path` as CSV
///   setting,method,n,reps,detection_rate,p_mean,p_se,time_mean_s,time_se_s
/// and `path` with its extension replaced by .json holding full histograms.
void emit_report(const std::vector<ExperimentResult>& results, const std::string& path);

std::string report_csv(const std::vector<ExperimentResult>& results);

}  // namespace mixqcd

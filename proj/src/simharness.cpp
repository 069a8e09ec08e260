#include "mixqcd/simharness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mixqcd/errors.hpp"
#include "mixqcd/gof.hpp"
#include "mixqcd/parallel.hpp"

namespace mixqcd {

std::string to_string(SettingId id) { return "S" + std::to_string(static_cast<int>(id)); }

SettingId parse_setting(const std::string& text) {
  if (text.size() == 2 && (text[0] == 'S' || text[0] == 's') && text[1] >= '1' && text[1] <= '6') {
    return static_cast<SettingId>(text[1] - '0');
  }
  throw InputError("unknown setting '" + text + "' (expected S1..S6)");
}

const std::vector<SettingId>& all_settings() {
  static const std::vector<SettingId> ids{SettingId::S1, SettingId::S2, SettingId::S3,
                                          SettingId::S4, SettingId::S5, SettingId::S6};
  return ids;
}

Setting make_setting(SettingId id) {
  const int index = static_cast<int>(id);
  if (index < 1 || index > 6) throw InputError("unknown setting id");
  const bool equal_weights = index <= 3;
  const int separation = (index - 1) % 3;  // 0 high, 1 medium, 2 low

  Vector mu(3), sigma(3), lambda(3);
  if (separation == 0) {
    mu << -5.0, 0.0, 5.0;
    sigma << 0.1, 0.1, 0.1;
  } else if (separation == 1) {
    mu << -0.5, 0.0, 0.5;
    sigma << 0.5, 0.5, 0.5;
  } else {
    mu << -0.5, 0.0, 0.5;
    sigma << 3.0, 3.0, 3.0;
  }
  if (equal_weights) {
    lambda << 0.33, 0.33, 0.34;
  } else {
    lambda << 0.2, 0.3, 0.5;
  }
  return {id, MixtureModel(Family::Cauchy, mu, sigma, lambda)};
}

std::pair<double, double> mean_and_se(const std::vector<double>& values) {
  if (values.empty()) return {std::nan(""), std::nan("")};
  const double k = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= k;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (k - 1.0)) / std::sqrt(k)};
}

ExperimentResult run_experiment(const Setting& setting, Method method, std::size_t n, std::size_t reps,
                                std::uint64_t base_seed, const FitConfig& cfg, const ExperimentOptions& options) {
  if (reps < 1) throw InputError("run_experiment: reps must be >= 1");
  cfg.validate();

  struct Replicate {
    std::size_t m_hat = 0;
    std::optional<double> p_value;
    double seconds = 0.0;
  };
  std::vector<Replicate> out(reps);
  parallel_for(reps, options.threads, [&](std::size_t r) {
    const SortedSample data(sample(setting.model, n, base_seed + r));
    try {
      const auto start = std::chrono::steady_clock::now();
      const FitReport report = fit(data, cfg, setting.model.family(), method);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out[r].m_hat = static_cast<std::size_t>(report.model.m());
      out[r].p_value = ad_test(data, report.model).p_value;
      out[r].seconds = options.record_timing ? seconds : 0.0;
    } catch (const std::exception&) {
      out[r] = Replicate{};  // counted under m-hat = 0, excluded from means
    }
  });

  ExperimentResult result;
  result.setting = setting.id;
  result.method = method;
  result.n = n;
  result.reps = reps;
  std::vector<double> p_values, times;
  for (const auto& rep : out) {
    ++result.mhat_histogram[rep.m_hat];
    if (rep.p_value) {
      p_values.push_back(*rep.p_value);
      times.push_back(rep.seconds);
    }
  }
  const auto hit = result.mhat_histogram.find(3);
  result.detection_rate =
      hit == result.mhat_histogram.end() ? 0.0 : static_cast<double>(hit->second) / static_cast<double>(reps);
  std::tie(result.p_mean, result.p_se) = mean_and_se(p_values);
  std::tie(result.time_mean_s, result.time_se_s) = mean_and_se(times);
  return result;
}

std::string report_csv(const std::vector<ExperimentResult>& results) {
  std::string csv = "setting,method,n,reps,detection_rate,p_mean,p_se,time_mean_s,time_se_s\n";
  for (const auto& r : results) {
    csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(r.setting), to_string(r.method), r.n, r.reps,
                       r.detection_rate, r.p_mean, r.p_se, r.time_mean_s, r.time_se_s);
  }
  return csv;
}

void emit_report(const std::vector<ExperimentResult>& results, const std::string& path) {
  if (results.empty()) throw InputError("emit_report: no results");
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw IoError("cannot write report '" + path + "'");
  csv << report_csv(results);
  if (!csv) throw IoError("failed writing report '" + path + "'");

  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json row;
    row["setting"] = to_string(r.setting);
    row["method"] = to_string(r.method);
    row["n"] = r.n;
    row["reps"] = r.reps;
    row["detection_rate"] = r.detection_rate;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [m, count] : r.mhat_histogram) hist[std::to_string(m)] = count;
    row["mhat_histogram"] = hist;
    row["p_mean"] = r.p_mean;
    row["p_se"] = r.p_se;
    row["time_mean_s"] = r.time_mean_s;
    row["time_se_s"] = r.time_se_s;
    j.push_back(row);
  }
  const std::string sidecar = std::filesystem::path(path).replace_extension(".json").string();
  std::ofstream js(sidecar, std::ios::binary);
  if (!js) throw IoError("cannot write report '" + sidecar + "'");
  js << j.dump(2) << '\n';
}

}  // namespace mixqcd

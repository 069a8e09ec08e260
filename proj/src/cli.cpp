#include "mixqcd/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mixqcd/mixqcd.hpp"

namespace mixqcd {

namespace {

/// Flag values for the fitting pipeline; converted to FitConfig and validated
/// before any work starts.
struct FitFlags {
  std::string family = "cauchy";
  std::size_t m_init = 10;
  double tau = 1.0;
  double epsilon = 0.05;
  double kappa = 1e-3;
  int max_iter = 200;
  std::string weight_mode = "simplex_ls";
  bool refine = true;
  std::string cp_penalty = "bic";
  double cp_bic_scale = 0.6;

  FitConfig config() const {
    FitConfig cfg;
    cfg.m_init = m_init;
    cfg.tau = tau;
    cfg.epsilon = epsilon;
    cfg.kappa = kappa;
    cfg.max_iter = max_iter;
    cfg.weight_mode = parse_weight_mode(weight_mode);
    cfg.refine = refine;
    cfg.cp_penalty = Penalty::parse(cp_penalty, cp_bic_scale);
    cfg.validate();
    return cfg;
  }
};

void add_fit_flags(CLI::App* sub, FitFlags& f) {
  sub->add_option("--family", f.family, "Component family: cauchy, normal or logistic")->capture_default_str();
  sub->add_option("--m-init", f.m_init, "Size of the initial quantile grid (0 = floor(sqrt(n)))")
      ->capture_default_str();
  sub->add_option("--tau", f.tau, "Scale divisor for the quantile scale estimate (>= 1)")->capture_default_str();
  sub->add_option("--epsilon", f.epsilon, "Cusum threshold for IQCD (0 < eps < 1)")->capture_default_str();
  sub->add_option("--kappa", f.kappa, "Relative NLL tolerance for coordinate descent")->capture_default_str();
  sub->add_option("--max-iter", f.max_iter, "Iteration cap for refinement / IQCD")->capture_default_str();
  sub->add_option("--weight-mode", f.weight_mode, "Weight solver: simplex_ls or ols_rescale")
      ->capture_default_str();
  sub->add_flag("--refine,!--no-refine", f.refine, "Coordinate-descent refinement of the NIQCD start (on by default)")
      ->capture_default_str();
  sub->add_option("--cp-penalty", f.cp_penalty, "Change-point penalty: 'bic' or a positive number")
      ->capture_default_str();
  sub->add_option("--cp-bic-scale", f.cp_bic_scale, "Multiplier of the data-adaptive 'bic' penalty")
      ->capture_default_str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite mixtures of heavy-tailed location-scale components by quantile change detection",
               "mixqcd"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from a key=value config file");
  app.fallthrough();
  bool no_timing = false;
  app.add_flag("--no-timing", no_timing, "Write zero elapsed times so outputs are byte-stable");

  // fit
  FitFlags fit_flags;
  std::string fit_input;
  bool fit_as_prices = false;
  bool fit_scale100 = true;
  std::string fit_method = "niqcd";
  auto* fit_cmd = app.add_subcommand("fit", "Fit a mixture to one column of observations or a price CSV");
  fit_cmd->add_option("--input", fit_input, "Data CSV (one numeric column, optional header)")->required();
  fit_cmd->add_flag("--as-prices", fit_as_prices, "Treat --input as a date,close price file and fit log returns");
  fit_cmd->add_flag("--scale100,!--no-scale100", fit_scale100, "Multiply log returns by 100 (with --as-prices; on by default)")
      ->capture_default_str();
  fit_cmd->add_option("--method", fit_method, "niqcd or iqcd")->capture_default_str();
  add_fit_flags(fit_cmd, fit_flags);

  // simulate
  FitFlags sim_flags;
  std::string sim_setting = "all";
  std::string sim_method = "niqcd";
  std::size_t sim_n = 100;
  std::size_t sim_reps = 50;
  std::uint64_t sim_seed = 0;
  std::string sim_out = ".";
  std::size_t sim_threads = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the six-setting simulation study");
  sim_cmd->add_option("--setting", sim_setting, "S1..S6 or all")->capture_default_str();
  sim_cmd->add_option("--method", sim_method, "niqcd, iqcd or both")->capture_default_str();
  sim_cmd->add_option("--n", sim_n, "Sample size per replicate")->capture_default_str();
  sim_cmd->add_option("--reps", sim_reps, "Replicates per setting")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Base seed; replicate r uses seed + r")->required();
  sim_cmd->add_option("--out", sim_out, "Output directory for report.csv / report.json")->capture_default_str();
  sim_cmd->add_option("--threads", sim_threads, "Worker threads")->capture_default_str();
  add_fit_flags(sim_cmd, sim_flags);

  // metrics
  std::string metrics_model;
  std::size_t metrics_mc_n = 100000;
  std::uint64_t metrics_seed = 0;
  double metrics_tol = 1e-8;
  auto* metrics_cmd = app.add_subcommand("metrics", "Overlap and dispersion measures of a model");
  metrics_cmd->add_option("--model", metrics_model, "Model JSON")->required();
  metrics_cmd->add_option("--mc-n", metrics_mc_n, "Monte Carlo draws for the rBCD denominator")
      ->capture_default_str();
  metrics_cmd->add_option("--seed", metrics_seed, "Monte Carlo seed")->capture_default_str();
  metrics_cmd->add_option("--abs-tol", metrics_tol, "Quadrature absolute tolerance")->capture_default_str();

  // gof
  std::string gof_model, gof_data, gof_method = "asymptotic";
  int gof_b = 499;
  std::uint64_t gof_seed = 0;
  std::size_t gof_threads = 1;
  auto* gof_cmd = app.add_subcommand("gof", "Anderson-Darling test of data against a model");
  gof_cmd->add_option("--model", gof_model, "Model JSON")->required();
  gof_cmd->add_option("--data", gof_data, "Data CSV (one numeric column)")->required();
  gof_cmd->add_option("--method", gof_method, "asymptotic or bootstrap")->capture_default_str();
  gof_cmd->add_option("--b", gof_b, "Bootstrap replicates (>= 199)")->capture_default_str();
  gof_cmd->add_option("--seed", gof_seed, "Bootstrap seed")->capture_default_str();
  gof_cmd->add_option("--threads", gof_threads, "Worker threads")->capture_default_str();

  // stock
  FitFlags stock_flags;
  std::string stock_prices, stock_weekly_from, stock_predict_from, stock_out = ".";
  bool stock_scale100 = true;
  bool stock_unweighted = false;
  std::size_t stock_threads = 1;
  auto* stock_cmd = app.add_subcommand("stock", "Return-regime workflow on a price CSV");
  stock_cmd->add_option("--prices", stock_prices, "Price CSV with header date,close")->required();
  stock_cmd->add_flag("--scale100,!--no-scale100", stock_scale100, "Multiply log returns by 100 (on by default)")
      ->capture_default_str();
  stock_cmd->add_option("--weekly-from", stock_weekly_from, "First weekly refit boundary (YYYY-MM-DD)");
  stock_cmd->add_option("--predict-from", stock_predict_from,
                        "Train on returns before this date, classify from it on (YYYY-MM-DD)");
  stock_cmd->add_option("--out", stock_out, "Output directory")->capture_default_str();
  stock_cmd->add_flag("--unweighted", stock_unweighted, "Classify by unweighted component densities");
  stock_cmd->add_option("--threads", stock_threads, "Worker threads for weekly refits")->capture_default_str();
  add_fit_flags(stock_cmd, stock_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);  // --help / --version
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (const auto* sub : {fit_cmd, sim_cmd, metrics_cmd, gof_cmd, stock_cmd}) {
      if (sub->parsed()) failing = sub;
    }
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      const FitConfig cfg = fit_flags.config();
      const Family family = parse_family(fit_flags.family);
      std::vector<double> data;
      if (fit_as_prices) {
        data = to_returns(read_price_csv(fit_input), fit_scale100 ? 100.0 : 1.0).returns;
      } else {
        data = read_column_csv(fit_input);
      }
      const SortedSample sample(std::move(data));
      FitReport report = fit(sample, cfg, family, parse_method(fit_method));
      if (no_timing) report.elapsed_seconds = 0.0;
      out << to_json(report).dump(2) << '\n';
      if (report.weight_fallback) err << "warning: weight solver fell back to uniform weights\n";
    } else if (sim_cmd->parsed()) {
      const FitConfig cfg = sim_flags.config();
      std::vector<SettingId> settings;
      if (sim_setting == "all") {
        settings = all_settings();
      } else {
        settings.push_back(parse_setting(sim_setting));
      }
      std::vector<Method> methods;
      if (sim_method == "both") {
        methods = {Method::Niqcd, Method::Iqcd};
      } else {
        methods.push_back(parse_method(sim_method));
      }
      if (sim_n < 10) throw InputError("--n must be at least 10");
      if (sim_reps < 1) throw InputError("--reps must be at least 1");
      std::vector<ExperimentResult> results;
      ExperimentOptions options{sim_threads, !no_timing};
      for (SettingId id : settings) {
        for (Method method : methods) {
          results.push_back(run_experiment(make_setting(id), method, sim_n, sim_reps, sim_seed, cfg, options));
        }
      }
      ensure_dir(sim_out);
      const auto path = (std::filesystem::path(sim_out) / "report.csv").string();
      emit_report(results, path);
      out << report_csv(results);
    } else if (metrics_cmd->parsed()) {
      const MixtureModel model = load_model(metrics_model);
      out << to_json(overlap_report(model, metrics_mc_n, metrics_seed, metrics_tol)).dump(2) << '\n';
    } else if (gof_cmd->parsed()) {
      const MixtureModel model = load_model(gof_model);
      const SortedSample sample(read_column_csv(gof_data));
      const AdResult result = ad_test(sample, model, parse_ad_method(gof_method), gof_b, gof_seed, gof_threads);
      out << to_json(result).dump(2) << '\n';
    } else if (stock_cmd->parsed()) {
      const FitConfig cfg = stock_flags.config();
      const Family family = parse_family(stock_flags.family);
      const ReturnSeries all = ingest_prices(stock_prices, stock_scale100 ? 100.0 : 1.0);
      ReturnSeries train = all;
      std::optional<Date> predict_from;
      if (!stock_predict_from.empty()) {
        predict_from = parse_date(stock_predict_from);
        train = slice(all, all.dates.front(), *predict_from - std::chrono::days{1});
      }
      if (train.returns.size() < 10) throw InputError("stock: fewer than 10 training returns");
      const SortedSample sample(train.returns);
      FitReport report = fit_niqcd(sample, cfg, family);
      if (no_timing) report.elapsed_seconds = 0.0;
      const auto moments = skewness_kurtosis(train.returns);
      const AdResult ad = ad_test(sample, report.model);
      auto fit_json = to_json(report);
      fit_json["n_returns"] = train.returns.size();
      fit_json["skewness"] = moments.skewness;
      fit_json["kurtosis"] = moments.excess_kurtosis + 3.0;
      fit_json["ad_p_value"] = ad.p_value;

      ensure_dir(stock_out);
      const std::filesystem::path dir(stock_out);
      write_file(dir / "fit.json", fit_json.dump(2) + "\n");
      if (!stock_weekly_from.empty()) {
        auto fits = weekly_refit(train, parse_date(stock_weekly_from), cfg, family, stock_threads);
        write_file(dir / "trajectory.csv", trajectory_csv(fits));
      }
      if (predict_from) {
        const ReturnSeries test = slice(all, *predict_from, all.dates.back());
        const CategorySeries cats = classify(report.model, test, !stock_unweighted);
        if (!cats.named) {
          err << "notice: fitted model has " << report.model.m()
              << " components; categories are raw component indices\n";
        }
        write_file(dir / "categories.csv", category_csv(cats));
      }
      out << fit_json.dump(2) << '\n';
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace mixqcd

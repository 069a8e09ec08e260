#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixqcd/cli.hpp"
#include "mixqcd/mixture.hpp"
#include "mixqcd/simharness.hpp"
#include "synthetic.hpp"

using namespace mixqcd;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mixqcd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mixqcd_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_sample(const fs::path& dir) {
  const auto x = sample(make_setting(SettingId::S1).model, 200, 4);
  std::ofstream f(dir / "d.csv");
  f << "x\n";
  for (double v : x) f << v << '\n';
  return dir / "d.csv";
}

fs::path write_model(const fs::path& dir) {
  std::ofstream(dir / "model.json") << to_json(make_setting(SettingId::S1).model).dump();
  return dir / "model.json";
}

}  // namespace

TEST_CASE("fit subcommand") {
  const auto dir = scratch("fit");
  const auto data = write_sample(dir);
  const auto r = run({"fit", "--input", data.string(), "--family", "cauchy"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["method"] == "NIQCD");
  CHECK(j["m"] == 3);

  const auto iq = run({"fit", "--input", data.string(), "--method", "iqcd"});
  CHECK(iq.code == kExitOk);
  CHECK(nlohmann::json::parse(iq.out)["method"] == "IQCD");
}

TEST_CASE("usage errors exit 1 with usage text") {
  const auto none = run({"fit"});
  CHECK(none.code == kExitUsage);
  CHECK(none.err.find("--input") != std::string::npos);
  CHECK(none.out.empty());

  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"simulate", "--setting", "S1"}).code == kExitUsage);  // --seed is mandatory
  CHECK(run({"fit", "--input", "x.csv", "--m-init", "ten"}).code == kExitUsage);
}

TEST_CASE("data and numerical errors") {
  const auto dir = scratch("errors");
  CHECK(run({"fit", "--input", (dir / "missing.csv").string()}).code == kExitData);
  std::ofstream(dir / "bad.csv") << "1\n2\nthree\n";
  const auto bad = run({"fit", "--input", (dir / "bad.csv").string()});
  CHECK(bad.code == kExitData);
  CHECK(bad.err.find(":3:") != std::string::npos);
  const auto data = write_sample(dir);
  CHECK(run({"fit", "--input", data.string(), "--tau", "0.5"}).code == kExitData);
  CHECK(run({"fit", "--input", data.string(), "--family", "gamma"}).code == kExitData);
  CHECK(run({"simulate", "--setting", "S9", "--seed", "1", "--out", dir.string()}).code == kExitData);
}

TEST_CASE("help lists every flag with its default") {
  const auto h = run({"fit", "--help"});
  CHECK(h.code == kExitOk);
  for (const char* flag : {"--input", "--family", "--m-init", "--tau", "--epsilon", "--kappa", "--max-iter",
                           "--weight-mode", "--refine", "--cp-penalty", "--cp-bic-scale", "--method"}) {
    CHECK_MESSAGE(h.out.find(flag) != std::string::npos, flag);
  }
  for (const char* value : {"10", "0.05", "0.001", "simplex_ls", "cauchy", "bic"}) {
    CHECK_MESSAGE(h.out.find(value) != std::string::npos, value);
  }
  for (const char* sub : {"simulate", "metrics", "gof", "stock"}) {
    const auto sh = run({sub, "--help"});
    CHECK(sh.code == kExitOk);
    CHECK(sh.out.find("--") != std::string::npos);
  }
  const auto v = run({"--version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find(kVersion) != std::string::npos);
}

TEST_CASE("config file supplies flags, command line overrides") {
  const auto dir = scratch("config");
  const auto data = write_sample(dir);
  std::ofstream(dir / "run.ini") << "[fit]\nm-init=6\nrefine=false\n";
  const auto from_file = run({"--config", (dir / "run.ini").string(), "--no-timing", "fit", "--input", data.string()});
  const auto explicit_flags = run({"--no-timing", "fit", "--input", data.string(), "--m-init", "6", "--no-refine"});
  REQUIRE(from_file.code == kExitOk);
  CHECK(from_file.out == explicit_flags.out);
  const auto default_flags = run({"--no-timing", "fit", "--input", data.string()});
  CHECK(from_file.out != default_flags.out);
}

TEST_CASE("simulate output is byte-identical across runs") {
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  const std::vector<std::string> common{"--no-timing", "simulate", "--setting", "all", "--method", "niqcd",
                                        "--n",         "100",      "--reps",    "10",  "--seed",   "7"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out", b.string(), "--threads", "3"});
  REQUIRE(run(args_a).code == kExitOk);
  REQUIRE(run(args_b).code == kExitOk);
  CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  const auto csv = slurp(a / "report.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("simulate through the installed binary") {
  const auto a = scratch("bin_a");
  const auto b = scratch("bin_b");
  const std::string cmd = std::string(MIXQCD_CLI) + " simulate --setting S2 --method both --n 100 --reps 5 --seed 7";
  REQUIRE(std::system((cmd + " --out " + a.string() + " > /dev/null").c_str()) == 0);
  REQUIRE(std::system((cmd + " --out " + b.string() + " > /dev/null").c_str()) == 0);
  const auto ra = slurp(a / "report.csv");
  const auto rb = slurp(b / "report.csv");
  // timing columns differ between runs; everything before them must not
  auto strip_time = [](const std::string& csv) {
    std::string out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);) {
      for (int i = 0; i < 2; ++i) line = line.substr(0, line.rfind(','));
      out += line + '\n';
    }
    return out;
  };
  CHECK(strip_time(ra) == strip_time(rb));
  CHECK(std::system((std::string(MIXQCD_CLI) + " fit > /dev/null 2>&1").c_str()) != 0);
}

TEST_CASE("metrics and gof subcommands") {
  const auto dir = scratch("metrics");
  const auto model = write_model(dir);
  const auto m = run({"metrics", "--model", model.string(), "--mc-n", "5000"});
  REQUIRE(m.code == kExitOk);
  const auto mj = nlohmann::json::parse(m.out);
  CHECK(mj["bcd"] == "undefined-heavy-tail");
  CHECK(mj["wdol"].get<double>() < 0.03);

  const auto data = write_sample(dir);
  const auto g = run({"gof", "--model", model.string(), "--data", data.string()});
  REQUIRE(g.code == kExitOk);
  CHECK(nlohmann::json::parse(g.out)["p_value"].get<double>() > 0.01);

  const std::vector<std::string> boot{"gof", "--model", model.string(), "--data", data.string(), "--method",
                                      "bootstrap", "--b", "199", "--seed", "3"};
  const auto g1 = run(boot);
  auto boot4 = boot;
  boot4.insert(boot4.end(), {"--threads", "4"});
  const auto g2 = run(boot4);
  CHECK(g1.code == kExitOk);
  CHECK(g1.out == g2.out);

  CHECK(run({"gof", "--model", model.string(), "--data", data.string(), "--method", "bootstrap", "--b", "10"})
            .code == kExitData);
  std::ofstream(dir / "broken.json") << "{\"family\": \"cauchy\"}";
  CHECK(run({"metrics", "--model", (dir / "broken.json").string()}).code == kExitData);
}

TEST_CASE("stock subcommand") {
  const auto dir = scratch("stock");
  const auto data = synthetic::regime_switch(synthetic::market_model(), 400, 200, 5);
  {
    std::ofstream f(dir / "prices.csv");
    f << "date,close\n";
    for (std::size_t t = 0; t < data.prices.closes.size(); ++t) {
      f << format_date(data.prices.dates[t]) << ',' << data.prices.closes[t] << '\n';
    }
  }
  const auto weekly = format_date(data.prices.dates[150]);
  const auto predict = format_date(data.prices.dates[380]);
  auto args = [&](const fs::path& out) {
    return std::vector<std::string>{"--no-timing", "stock",   "--prices", (dir / "prices.csv").string(),
                                    "--weekly-from", weekly, "--predict-from", predict,
                                    "--out",         out.string()};
  };
  const auto a = scratch("stock_a");
  const auto b = scratch("stock_b");
  const auto ra = run(args(a));
  REQUIRE(ra.code == kExitOk);
  REQUIRE(run(args(b)).code == kExitOk);
  for (const char* name : {"fit.json", "trajectory.csv", "categories.csv"}) {
    CHECK_MESSAGE(fs::exists(a / name), name);
    CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);
  }
  const auto fit = nlohmann::json::parse(slurp(a / "fit.json"));
  CHECK(fit["n_returns"] == 379);
  CHECK(fit.contains("skewness"));
  CHECK(fit.contains("kurtosis"));
  const auto cats = slurp(a / "categories.csv");
  CHECK(std::count(cats.begin(), cats.end(), '\n') == 1 + 21);

  std::ofstream(dir / "bad.csv") << "date,close\n2020-01-02,100\n2020-01-03,0\n";
  CHECK(run({"stock", "--prices", (dir / "bad.csv").string(), "--out", a.string()}).code == kExitData);
}

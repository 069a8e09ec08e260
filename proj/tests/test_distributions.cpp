#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "mixqcd/errors.hpp"
#include "mixqcd/family.hpp"
#include "mixqcd/mixture.hpp"
#include "mixqcd/simharness.hpp"
#include "oracles.hpp"

using namespace mixqcd;

namespace {

constexpr double kPi = std::numbers::pi;

MixtureModel s1() { return make_setting(SettingId::S1).model; }

// Plain bisection on the mixture CDF; slow but independent of the library's
// safeguarded Newton iteration.
double bisect_median(const MixtureModel& m) {
  double lo = -1e6;
  double hi = 1e6;
  for (int i = 0; i < 300 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    double cdf = 0.0;
    for (Eigen::Index k = 0; k < m.m(); ++k) {
      cdf += m.lambda()(k) * (0.5 + std::atan((mid - m.mu()(k)) / m.sigma()(k)) / kPi);
    }
    (cdf < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("standard densities at the peak and one unit out") {
  CHECK(std_pdf(Family::Cauchy, 0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-15));
  CHECK(std_pdf(Family::Cauchy, 1.0) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-15));
  CHECK(std_pdf(Family::Normal, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * kPi)).epsilon(1e-15));
  CHECK(std_pdf(Family::Logistic, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(std_pdf(Family::Cauchy, std::nan("")), InputError);
  CHECK_THROWS_AS(std_pdf(Family::Normal, HUGE_VAL), InputError);
}

TEST_CASE("standard CDF values") {
  CHECK(std_cdf(Family::Cauchy, 1.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(std_cdf(Family::Cauchy, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std_cdf(Family::Cauchy, -1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std_cdf(Family::Normal, 0.0) == 0.5);
  CHECK(std_cdf(Family::Logistic, 0.0) == 0.5);
  CHECK(std_cdf(Family::Cauchy, -HUGE_VAL) == 0.0);
  CHECK(std_cdf(Family::Normal, HUGE_VAL) == 1.0);
  // far-left Cauchy tail keeps relative accuracy: G(-x) ~ 1/(pi x)
  const double far = std_cdf(Family::Cauchy, -1e12);
  CHECK(far == doctest::Approx(1.0 / (kPi * 1e12)).epsilon(1e-9));
}

TEST_CASE("log density agrees with log of density") {
  for (Family f : {Family::Cauchy, Family::Normal, Family::Logistic}) {
    for (double z : {-30.0, -3.0, -0.5, 0.0, 0.7, 4.0, 25.0}) {
      CHECK(std_log_pdf(f, z) == doctest::Approx(std::log(std_pdf(f, z))).epsilon(1e-12));
    }
  }
  // no underflow far out
  CHECK(std::isfinite(std_log_pdf(Family::Normal, 100.0)));
  CHECK(std::isfinite(std_log_pdf(Family::Logistic, 1000.0)));
}

TEST_CASE("quantile inverts CDF") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (Family f : {Family::Cauchy, Family::Normal, Family::Logistic}) {
    for (int i = 0; i < 200; ++i) {
      const double p = u(rng);
      CHECK(std_cdf(f, std_quantile(f, p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(std::isfinite(std_quantile(f, 0.0)));
    CHECK(std::isfinite(std_quantile(f, 1.0)));
  }
}

TEST_CASE("family names round-trip") {
  for (Family f : {Family::Cauchy, Family::Normal, Family::Logistic}) {
    CHECK(parse_family(to_string(f)) == f);
  }
  CHECK_THROWS_AS(parse_family("gamma"), InputError);
}

TEST_CASE("mixture construction validates parameters") {
  Vector mu(2), sigma(2), lambda(2);
  mu << 0.0, 1.0;
  sigma << 1.0, 1.0;
  lambda << 0.5, 0.5;
  CHECK_NOTHROW(MixtureModel(Family::Cauchy, mu, sigma, lambda));

  Vector bad_sigma(2);
  bad_sigma << 1.0, 0.0;
  CHECK_THROWS_AS(MixtureModel(Family::Cauchy, mu, bad_sigma, lambda), InputError);

  Vector bad_lambda(2);
  bad_lambda << 0.6, 0.6;
  CHECK_THROWS_AS(MixtureModel(Family::Cauchy, mu, sigma, bad_lambda), InputError);
  bad_lambda << -0.1, 1.1;
  CHECK_THROWS_AS(MixtureModel(Family::Cauchy, mu, sigma, bad_lambda), InputError);

  Vector unsorted(2);
  unsorted << 1.0, 0.0;
  CHECK_THROWS_AS(MixtureModel(Family::Cauchy, unsorted, sigma, lambda), InputError);
  const auto fixed = MixtureModel::sorted(Family::Cauchy, unsorted, sigma, lambda);
  CHECK(fixed.mu()(0) == 0.0);

  CHECK_THROWS_AS(MixtureModel(Family::Cauchy, Vector(), Vector(), Vector()), InputError);
  Vector short_sigma(1);
  short_sigma << 1.0;
  CHECK_THROWS_AS(MixtureModel(Family::Cauchy, mu, short_sigma, lambda), InputError);
}

TEST_CASE("mixture density examples") {
  const MixtureModel unit(Family::Cauchy, Vector::Constant(1, 0.0), Vector::Constant(1, 1.0),
                          Vector::Constant(1, 1.0));
  CHECK(mixture_pdf(unit, 0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-15));

  // three-term sum by hand
  const auto m = s1();
  const double g50 = 1.0 / (kPi * (1.0 + 2500.0)) / 0.1;
  const double g0 = 1.0 / kPi / 0.1;
  const double expect = 0.33 * g50 + 0.33 * g0 + 0.34 * g50;
  CHECK(mixture_pdf(m, 0.0) == doctest::Approx(expect).epsilon(1e-14));

  Vector mu(2), sigma(2), lambda(2);
  mu << -1.0, 2.0;
  sigma << 0.5, 3.0;
  lambda << 1.0, 0.0;
  const MixtureModel lone(Family::Normal, mu, sigma, lambda);
  for (double x : {-3.0, 0.0, 1.5, 8.0}) {
    CHECK(mixture_pdf(lone, x) == doctest::Approx(lone.component_pdf(0, x)).epsilon(1e-15));
  }
}

TEST_CASE("mixture CDF examples") {
  const MixtureModel unit(Family::Cauchy, Vector::Constant(1, 0.0), Vector::Constant(1, 1.0),
                          Vector::Constant(1, 1.0));
  CHECK(mixture_cdf(unit, 1.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(mixture_cdf(s1(), -HUGE_VAL) == 0.0);
  CHECK(mixture_cdf(s1(), HUGE_VAL) == 1.0);

  const double g50 = 0.5 + std::atan(50.0) / kPi;
  const double expect = 0.33 * g50 + 0.33 * 0.5 + 0.34 * (1.0 - g50);
  CHECK(mixture_cdf(s1(), 0.0) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("mixture log density is stable where the density underflows") {
  Vector mu(2), sigma(2), lambda(2);
  mu << -1.0, 1.0;
  sigma << 0.01, 0.01;
  lambda << 0.5, 0.5;
  const MixtureModel m(Family::Normal, mu, sigma, lambda);
  const double far = mixture_log_pdf(m, 20.0);
  CHECK(std::isfinite(far));
  // dominated by the right component: log(0.5) + log N(1900; 0, 1) - log(0.01)
  const double z = 1900.0;
  const double expect = std::log(0.5) - 0.5 * z * z - 0.5 * std::log(2 * kPi) - std::log(0.01);
  CHECK(far == doctest::Approx(expect).epsilon(1e-12));
  CHECK(mixture_log_pdf(s1(), 0.3) == doctest::Approx(std::log(mixture_pdf(s1(), 0.3))).epsilon(1e-13));
}

TEST_CASE("mixture median") {
  const MixtureModel single(Family::Cauchy, Vector::Constant(1, 3.0), Vector::Constant(1, 2.0),
                            Vector::Constant(1, 1.0));
  CHECK(mixture_median(single) == doctest::Approx(3.0).epsilon(1e-10));

  Vector mu(2), sigma(2), lambda(2);
  mu << -2.5, 2.5;
  sigma << 0.7, 0.7;
  lambda << 0.5, 0.5;
  CHECK(std::abs(mixture_median(MixtureModel(Family::Cauchy, mu, sigma, lambda))) < 1e-10);

  const auto s4 = make_setting(SettingId::S4).model;
  CHECK(std::abs(mixture_median(s4) - bisect_median(s4)) < 1e-10);
  const auto s6 = make_setting(SettingId::S6).model;
  CHECK(std::abs(mixture_median(s6) - bisect_median(s6)) < 1e-10);
}

TEST_CASE("sampling is deterministic and matches the model") {
  const auto m = s1();
  CHECK(sample(m, 500, 42) == sample(m, 500, 42));
  CHECK(sample(m, 500, 42) != sample(m, 500, 43));

  const MixtureModel unit(Family::Cauchy, Vector::Constant(1, 0.0), Vector::Constant(1, 1.0),
                          Vector::Constant(1, 1.0));
  auto draws = sample(unit, 100000, 5);
  std::nth_element(draws.begin(), draws.begin() + 50000, draws.end());
  CHECK(std::abs(draws[50000]) < 0.02);

  const auto s1draws = sample(m, 100000, 9);
  const auto near3 = std::count_if(s1draws.begin(), s1draws.end(), [](double x) {
    return std::abs(x - 5.0) < std::abs(x) && std::abs(x - 5.0) < std::abs(x + 5.0);
  });
  CHECK(static_cast<double>(near3) / 100000.0 == doctest::Approx(0.34).epsilon(0.01 / 0.34));
}

TEST_CASE("finite differences of the CDF reproduce the density") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> loc(-5.0, 5.0);
  std::uniform_real_distribution<double> scale(0.2, 3.0);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  int checked = 0;
  for (Family f : {Family::Cauchy, Family::Normal, Family::Logistic}) {
    for (int trial = 0; trial < 50; ++trial) {
      const int k = 1 + trial % 3;
      Vector mu(k), sigma(k), lambda(k);
      for (int i = 0; i < k; ++i) {
        mu(i) = loc(rng);
        sigma(i) = scale(rng);
        lambda(i) = unit(rng);
      }
      lambda /= lambda.sum();
      const auto m = MixtureModel::sorted(f, mu, sigma, lambda);
      for (int probe = 0; probe < 5; ++probe) {
        const double x = sample(m, 1, static_cast<std::uint64_t>(100 * trial + probe))[0];
        const double pdf = mixture_pdf(m, x);
        CHECK(std::abs(oracle::fd_density(m, x) - pdf) <= 1e-5 * pdf);
        ++checked;
      }
    }
  }
  CHECK(checked == 750);
}

TEST_CASE("affine map transforms parameters") {
  const auto m = s1().affine(2.0, -1.0);
  CHECK(m.mu()(0) == doctest::Approx(-11.0));
  CHECK(m.sigma()(2) == doctest::Approx(0.2));
  CHECK(m.lambda()(2) == doctest::Approx(0.34));
  CHECK(mixture_cdf(m, 2.0 * 0.7 - 1.0) == doctest::Approx(mixture_cdf(s1(), 0.7)).epsilon(1e-14));
  CHECK_THROWS_AS(s1().affine(-1.0, 0.0), InputError);
}

TEST_CASE("model JSON round-trip") {
  const auto m = make_setting(SettingId::S5).model;
  const auto j = to_json(m);
  CHECK(j["family"] == "cauchy");
  CHECK(j["m"] == 3);
  const auto back = model_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.mu() == m.mu());
  CHECK(back.sigma() == m.sigma());
  CHECK(back.lambda().isApprox(m.lambda(), 1e-15));

  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"family":"cauchy"})")), InputError);
  CHECK_THROWS(load_model("/nonexistent/model.json"));
}

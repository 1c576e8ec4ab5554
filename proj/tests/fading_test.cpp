#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "riskalloc/fading.hpp"
#include "riskalloc/random.hpp"

using riskalloc::FadingKind;
using riskalloc::FadingModel;
using riskalloc::RandomStream;

namespace {

// Plain bisection, kept separate from the library's quantile paths.
template <class F>
double invert(const F& cdf, double target) {
  double lo = 0.0, hi = 64.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double frequency_below(const FadingModel& m, double level, int n, std::uint64_t seed) {
  RandomStream rng(seed);
  int count = 0;
  for (int i = 0; i < n; ++i) count += m.sample(rng) <= level;
  return static_cast<double>(count) / n;
}

}  // namespace

TEST_CASE("uniform stream is open on (0,1) and reproducible") {
  RandomStream a(7), b(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
  }
  CHECK(riskalloc::derive_seed(1, 0) != riskalloc::derive_seed(1, 1));
  CHECK(riskalloc::evaluation_seed(5) != 5);
  CHECK((riskalloc::evaluation_seed(5) & ~riskalloc::kEvaluationSeedBit) == 5);
}

TEST_CASE("inverse-cdf sampling") {
  const FadingModel rayleigh = FadingModel::rayleigh(1.0);
  const double oracle =
      invert([](double h) { return 1.0 - std::exp(-h * h / 2.0); }, 0.5);
  CHECK(rayleigh.quantile(0.5) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(rayleigh.quantile(0.5) == doctest::Approx(1.1774100225154747).epsilon(1e-14));

  CHECK(rayleigh.quantile(1e-300) < 1e-140);
  CHECK(FadingModel::weibull(1.0, 2.0).quantile(1e-300) < 1e-140);

  const FadingModel weibull = FadingModel::weibull(1.0, 2.0);
  CHECK(weibull.quantile(1.0 - std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-14));

  RandomStream rng(11), copy(11);
  CHECK(rayleigh.sample(rng) == rayleigh.quantile(copy.uniform()));
}

TEST_CASE("cdf values") {
  CHECK(FadingModel::rayleigh(1.0).cdf(0.0) == 0.0);
  CHECK(FadingModel::weibull(3.0, 1.7).cdf(0.0) == 0.0);

  const FadingModel w = FadingModel::weibull(2.0, 1.0);
  CHECK(w.cdf(2.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(frequency_below(w, 2.0, 1000000, 3) == doctest::Approx(0.6321205588).epsilon(1e-3));

  const FadingModel r = FadingModel::rayleigh(1.0);
  CHECK(r.cdf(2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-14));
  CHECK(frequency_below(r, 2.0, 1000000, 4) == doctest::Approx(0.8646647168).epsilon(1e-3));

  CHECK(r.cdf(1e6) == 1.0);
  CHECK_THROWS_AS((void)r.cdf(-0.1), std::domain_error);
  CHECK_THROWS_AS((void)r.cdf(std::nan("")), std::domain_error);
}

TEST_CASE("quantile values and domain") {
  const FadingModel r = FadingModel::rayleigh(1.0);
  CHECK(r.quantile(1.0 - std::exp(-0.5)) == doctest::Approx(1.0).epsilon(1e-14));

  const FadingModel w = FadingModel::weibull(1.0, 2.0);
  const double oracle = invert([](double h) { return 1.0 - std::exp(-h * h); }, 0.9);
  CHECK(w.quantile(0.9) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(w.quantile(0.9) == doctest::Approx(1.5174271293851462).epsilon(1e-14));

  for (double h : {0.5, 1.0, 2.0}) {
    CHECK(r.quantile(r.cdf(h)) == doctest::Approx(h).epsilon(1e-12));
    CHECK(w.quantile(w.cdf(h)) == doctest::Approx(h).epsilon(1e-12));
  }
  for (double bad : {0.0, 1.0, -0.2, 1.5}) {
    CHECK_THROWS_AS((void)r.quantile(bad), std::domain_error);
  }
}

TEST_CASE("continuous kinds: cdf(quantile(a)) == a") {
  const FadingModel models[] = {FadingModel::rayleigh(1.0), FadingModel::rayleigh(0.3),
                                FadingModel::weibull(1.0, 1.0), FadingModel::weibull(2.5, 0.7),
                                FadingModel::weibull(0.8, 3.2)};
  for (const auto& m : models) {
    for (double a : {0.01, 0.1, 0.45, 0.5, 0.9, 0.99}) {
      CHECK(std::abs(m.cdf(m.quantile(a)) - a) < 1e-9);
    }
  }
}

TEST_CASE("continuous kinds: quantile(cdf(h)) round trip over the bulk") {
  std::mt19937_64 gen(2024);
  const FadingModel models[] = {FadingModel::rayleigh(1.0), FadingModel::rayleigh(2.0),
                                FadingModel::weibull(1.0, 1.5), FadingModel::weibull(0.5, 4.0)};
  for (const auto& m : models) {
    std::uniform_real_distribution<double> span(m.quantile(0.001), m.quantile(0.999));
    for (int i = 0; i < 1000; ++i) {
      const double h = span(gen);
      CHECK(std::abs(m.quantile(m.cdf(h)) - h) <= 1e-9 * h);
    }
  }
}

TEST_CASE("sample frequencies match the quantile") {
  const int n = 1000000;
  const FadingModel models[] = {FadingModel::rayleigh(1.0), FadingModel::weibull(1.3, 0.8)};
  std::uint64_t seed = 100;
  for (const auto& m : models) {
    for (double a : {0.1, 0.45, 0.9}) {
      const double freq = frequency_below(m, m.quantile(a), n, seed++);
      CHECK(std::abs(freq - a) <= 3.0 * std::sqrt(a * (1.0 - a) / n));
    }
  }
}

TEST_CASE("Rayleigh is Weibull with shape 2") {
  for (double rho : {0.25, 1.0, 3.0}) {
    const FadingModel r = FadingModel::rayleigh(rho);
    const FadingModel w = FadingModel::weibull(rho * std::sqrt(2.0), 2.0);
    for (double h = 0.0; h < 6.0 * rho; h += 0.01 * rho) {
      CHECK(std::abs(r.cdf(h) - w.cdf(h)) < 1e-12);
    }
  }
}

TEST_CASE("empirical model") {
  const FadingModel e = FadingModel::empirical({3.0, 1.0, 2.0, 2.0, 5.0});
  CHECK(e.kind() == FadingKind::kEmpirical);
  CHECK_FALSE(e.continuous());
  const auto& s = std::get<FadingModel::Empirical>(e.params()).samples;
  CHECK(std::is_sorted(s.begin(), s.end()));

  // right-continuous steps
  CHECK(e.cdf(0.5) == 0.0);
  CHECK(e.cdf(1.0) == doctest::Approx(0.2));
  CHECK(e.cdf(1.99) == doctest::Approx(0.2));
  CHECK(e.cdf(2.0) == doctest::Approx(0.6));
  CHECK(e.cdf(5.0) == 1.0);

  // lower-index order statistic: smallest sample with cdf >= alpha
  CHECK(e.quantile(0.2) == 1.0);
  CHECK(e.quantile(0.21) == 2.0);
  CHECK(e.quantile(0.6) == 2.0);
  CHECK(e.quantile(0.61) == 3.0);
  CHECK(e.quantile(0.999) == 5.0);

  const FadingModel ten = FadingModel::empirical({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(ten.quantile(0.3) == 3.0);  // 0.3 * 10 rounds above 3 in binary
  CHECK(ten.quantile(0.7) == 7.0);

  CHECK_THROWS_AS(FadingModel::empirical({}), std::invalid_argument);
  CHECK_THROWS_AS(FadingModel::empirical({1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("bisection quantile agrees with the analytic inverse") {
  const FadingModel models[] = {FadingModel::rayleigh(1.0), FadingModel::weibull(2.0, 0.6),
                                FadingModel::weibull(0.01, 5.0)};
  for (const auto& m : models) {
    for (double a : {1e-4, 0.1, 0.5, 0.9, 0.9999}) {
      const double q = riskalloc::bisect_quantile([&](double h) { return m.cdf(h); }, a);
      CHECK(std::abs(q - m.quantile(a)) <= 1e-10);
      CHECK(m.cdf(q) >= a);
    }
  }
  const FadingModel e = FadingModel::empirical({0.5, 1.5, 2.5, 3.5});
  for (double a : {0.1, 0.25, 0.3, 0.75, 0.8}) {
    const double q = riskalloc::bisect_quantile([&](double h) { return e.cdf(h); }, a);
    CHECK(std::abs(q - e.quantile(a)) <= 1e-10);
  }
  CHECK_THROWS_AS(riskalloc::bisect_quantile([](double) { return 0.0; }, 0.5),
                  std::domain_error);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(FadingModel::rayleigh(0.0), std::invalid_argument);
  CHECK_THROWS_AS(FadingModel::rayleigh(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(FadingModel::weibull(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(FadingModel::weibull(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FadingModel::weibull(INFINITY, 1.0), std::invalid_argument);
}

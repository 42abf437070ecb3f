#include <doctest.h>

#include <cmath>
#include <random>

#include "evimap/stats.hpp"

using namespace evimap;

TEST_CASE("type-7 quantiles on a uniform grid") {
  Vector g(1001);
  for (int i = 0; i <= 1000; ++i) g(i) = (1000 - i) / 1000.0;
  const auto s = summarize(g);
  CHECK(s.median == doctest::Approx(0.5));
  CHECK(s.lower95 == doctest::Approx(0.025));
  CHECK(s.upper95 == doctest::Approx(0.975));
  CHECK(quantile(g, 0.0) == 0.0);
  CHECK(quantile(g, 1.0) == 1.0);
  Vector two(2);
  two << 1.0, 3.0;
  CHECK(quantile(two, 0.25) == doctest::Approx(1.5));
  CHECK_THROWS_AS(summarize(Vector()), Error);
}

TEST_CASE("summary of a normal sample") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(1.0, 2.0);
  Vector x(200000);
  for (auto& v : x) v = n(rng);
  const auto s = summarize(x);
  CHECK(std::abs(s.median - 1.0) < 0.02);
  CHECK(std::abs(s.lower95 - (1.0 - 2.0 * 1.959964)) < 0.04);
  CHECK(std::abs(s.upper95 - (1.0 + 2.0 * 1.959964)) < 0.04);
  CHECK(std::abs(s.sd() - 2.0) < 0.01);
  CHECK(std::abs(s.mean() - 1.0) < 0.02);
}

TEST_CASE("deviance includes the normalising constant") {
  Vector y(2), sigma(2), delta(2);
  y << 0.1, -0.2;
  sigma << 0.3, 0.3;
  delta = y;
  CHECK(deviance(y, sigma, delta) == doctest::Approx(-1.14013708449).epsilon(1e-11));
  delta << 0.4, -0.2;
  CHECK(deviance(y, sigma, delta) == doctest::Approx(-1.14013708449 + 1.0).epsilon(1e-11));
  Vector shorter(1);
  CHECK_THROWS_AS(deviance(y, sigma, shorter), Error);
}

TEST_CASE("fit statistics by hand") {
  Vector y(1), sigma(1);
  y << 0.0;
  sigma << 1.0;
  Matrix d(2, 1);
  d << 1.0, -1.0;
  const auto f = fit_stats(y, sigma, d);
  const double c = std::log(2 * M_PI);
  CHECK(f.dbar == doctest::Approx(1.0 + c));
  CHECK(f.pd == doctest::Approx(1.0));
  CHECK(f.dic == f.dbar + f.pd);
  CHECK_THROWS_AS(fit_stats(y, sigma, Matrix(0, 1)), Error);
}

TEST_CASE("split R-hat") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Vector> iid(4, Vector(5000));
  for (auto& c : iid)
    for (auto& v : c) v = n(rng);
  CHECK(std::abs(gelman_rubin(iid) - 1.0) < 0.01);

  std::vector<Vector> apart = iid;
  apart[1].array() += 5.0;
  CHECK(gelman_rubin(apart) > 1.1);

  std::vector<Vector> drift(2, Vector(4000));
  for (auto& c : drift)
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = n(rng) + (i < 2000 ? 0.0 : 3.0);
  CHECK(gelman_rubin(drift) > 1.1);

  CHECK_THROWS_AS(gelman_rubin({iid[0]}), Error);
  CHECK_THROWS_AS(gelman_rubin({iid[0], Vector(10)}), Error);
  std::vector<Vector> flat(2, Vector::Constant(10, 1.0));
  CHECK(gelman_rubin(flat) == 1.0);
}

TEST_CASE("batch-means MCSE of iid draws is sd / sqrt(n)") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  Vector x(40000);
  for (auto& v : x) v = n(rng);
  CHECK(std::abs(mcse_mean(x) * 200.0 - 1.0) < 0.25);
}

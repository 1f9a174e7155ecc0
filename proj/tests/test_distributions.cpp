#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "scoring/distributions.hpp"
#include "scoring/numerics.hpp"

using namespace scoring;

TEST_CASE("constructors validate parameters") {
  CHECK_THROWS(Gaussian(0.0, 0.0));
  CHECK_THROWS(Gaussian(0.0, -1.0));
  CHECK_THROWS(Laplace(0.0, 0.0));
  CHECK_THROWS(NegBin(-2.0, 5.0));
  CHECK_THROWS(NegBin(2.0, 0.0));
  CHECK_THROWS(Ensemble({}));
  CHECK_THROWS(LocationScale(Gaussian(0.0, 1.0), 0.0, 0.0));
}

TEST_CASE("moments") {
  CHECK(mean(Gaussian(1.5, 2.0)) == 1.5);
  CHECK(variance(Gaussian(1.5, 2.0)) == 4.0);
  CHECK(variance(Laplace(0.0, 2.0)) == doctest::Approx(8.0));
  CHECK(mean(NegBin(3.7, 2.2)) == 3.7);
  CHECK(variance(NegBin(3.7, 2.2)) == doctest::Approx(3.7 + 3.7 * 3.7 / 2.2));
  Ensemble e({1.0, 2.0, 3.0, 6.0});
  CHECK(mean(e) == doctest::Approx(3.0));
  CHECK(variance(e) == doctest::Approx(3.5));  // population variance
  LocationScale ls(Laplace(0.0, 1.0), 2.0, 3.0);
  CHECK(mean(ls) == doctest::Approx(2.0));
  CHECK(variance(ls) == doctest::Approx(18.0));
}

TEST_CASE("log densities") {
  CHECK(log_pdf(Gaussian(0.0, 1.0), 0.0) ==
        doctest::Approx(-0.91893853320467267).epsilon(1e-14));
  CHECK(log_pdf(Laplace(0.0, 1.0), 0.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  CHECK(log_pdf(Laplace(1.0, 0.5), 2.0) ==
        doctest::Approx(-std::log(1.0) - 2.0).epsilon(1e-12));
  // reference pmf values from 25-digit arithmetic
  CHECK(log_pdf(NegBin(2.0, 5.0), 0.0) ==
        doctest::Approx(std::log(0.18593443208187065)).epsilon(1e-13));
  CHECK(log_pdf(NegBin(3.7, 2.2), 4.0) ==
        doctest::Approx(std::log(0.11310150223906839)).epsilon(1e-13));
  CHECK_THROWS_AS(log_pdf(NegBin(2.0, 5.0), 1.5), SupportError);
  CHECK_THROWS_AS(log_pdf(NegBin(2.0, 5.0), -1.0), SupportError);
  CHECK_THROWS_AS(log_pdf(Ensemble({1.0, 2.0}), 1.0), UnsupportedDistribution);
  // location-scale density shift: f(y) = f_base((y-mu)/sigma)/sigma
  LocationScale ls(Gaussian(0.0, 1.0), 3.0, 2.0);
  CHECK(log_pdf(ls, 4.0) == doctest::Approx(log_pdf(Gaussian(3.0, 2.0), 4.0)).epsilon(1e-13));
  CHECK_THROWS_AS(log_pdf(LocationScale(Ensemble({1.0, 2.0}), 0.0, 1.0), 1.0),
                  UnsupportedDistribution);
}

TEST_CASE("cdfs") {
  CHECK(cdf(Gaussian(0.0, 1.0), 0.0) == doctest::Approx(0.5));
  CHECK(cdf(Laplace(0.0, 1.0), 0.0) == doctest::Approx(0.5));
  CHECK(cdf(Laplace(0.0, 1.0), 1.0) == doctest::Approx(1.0 - 0.5 * std::exp(-1.0)));
  CHECK(cdf(NegBin(2.0, 5.0), 3.0) == doctest::Approx(0.83101307399856474).epsilon(1e-13));
  CHECK(cdf(NegBin(2.0, 5.0), 3.7) == doctest::Approx(0.83101307399856474).epsilon(1e-13));
  CHECK(cdf(NegBin(3.7, 2.2), 5.0) == doctest::Approx(0.76942411374711149).epsilon(1e-13));
  CHECK(cdf(NegBin(2.0, 5.0), -0.5) == 0.0);
  Ensemble e({1.0, 2.0, 3.0, 6.0});
  CHECK(cdf(e, 0.0) == 0.0);
  CHECK(cdf(e, 2.0) == doctest::Approx(0.5));
  CHECK(cdf(e, 10.0) == 1.0);
}

TEST_CASE("negbin pmf recurrence sums to one") {
  NegBin nb(3.7, 2.2);
  double total = 0.0;
  for (long long k = 0; k < 400; ++k) total += negbin_pmf(nb, k);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(negbin_pmf(nb, 0) == doctest::Approx(0.1141446267209231).epsilon(1e-13));
  CHECK(negbin_pmf(NegBin(2.0, 5.0), 4) == doctest::Approx(0.086733262778715172).epsilon(1e-13));
}

TEST_CASE("gaussian sampling matches its cdf") {
  RngStream rng(91, 0);
  Gaussian g(3.0, 2.0);
  auto xs = sample(g, 100000, rng);
  double d = oracle::ks_statistic(xs, [&](double x) { return cdf(g, x); });
  CHECK(d < 1.63 / std::sqrt(100000.0));
}

TEST_CASE("location-scale sampling matches the shifted gaussian") {
  RngStream rng(92, 0);
  LocationScale ls(Gaussian(0.0, 1.0), 3.0, 2.0);
  auto xs = sample(ls, 100000, rng);
  Gaussian g(3.0, 2.0);
  double d = oracle::ks_statistic(xs, [&](double x) { return cdf(g, x); });
  CHECK(d < 1.63 / std::sqrt(100000.0));
}

TEST_CASE("laplace sampling matches its cdf") {
  RngStream rng(93, 0);
  Laplace l(-1.0, 0.7);
  auto xs = sample(l, 100000, rng);
  double d = oracle::ks_statistic(xs, [&](double x) { return cdf(l, x); });
  CHECK(d < 1.63 / std::sqrt(100000.0));
}

TEST_CASE("negbin sampling matches the exact pmf") {
  RngStream rng(94, 0);
  NegBin nb(3.7, 2.2);
  std::size_t n = 100000;
  auto xs = sample(nb, n, rng);
  std::vector<double> freq(60, 0.0);
  for (double x : xs) {
    CHECK(x >= 0.0);
    CHECK(x == std::floor(x));
    if (x < 60.0) freq[static_cast<std::size_t>(x)] += 1.0 / static_cast<double>(n);
  }
  for (std::size_t k = 0; k < 30; ++k) {
    double p = negbin_pmf(nb, static_cast<long long>(k));
    double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(freq[k] - p) < 4.0 * se + 1e-12);
  }
}

TEST_CASE("ensemble sampling draws members uniformly") {
  RngStream rng(95, 0);
  Ensemble e({-1.0, 0.5, 2.0});
  std::size_t n = 30000;
  double hits = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = sample_one(Distribution(e), rng);
    bool member = x == -1.0 || x == 0.5 || x == 2.0;
    CHECK(member);
    if (x == 0.5) hits += 1.0;
  }
  double p = hits / static_cast<double>(n);
  CHECK(std::abs(p - 1.0 / 3.0) < 4.0 * std::sqrt(1.0 / 3.0 * 2.0 / 3.0 / n));
}

TEST_CASE("sample mean obeys the clt") {
  RngStream rng(96, 0);
  std::size_t n = 1000000;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += rng.normal();
  CHECK(std::abs(s / static_cast<double>(n)) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("pairwise mean absolute difference matches brute force") {
  Ensemble e({0.3, -1.2, 2.5, 0.9, -0.4, 1.8, 0.0});
  double m = static_cast<double>(e.members.size());
  double brute = 0.0;
  for (double a : e.members)
    for (double b : e.members) brute += std::abs(a - b);
  CHECK(pairwise_mean_abs_diff(e) == doctest::Approx(brute / (m * m)).epsilon(1e-13));
  CHECK(pairwise_mean_abs_diff(e, true) ==
        doctest::Approx(brute / (m * (m - 1.0))).epsilon(1e-13));
  CHECK(mean_abs_dev(e, 0.7) == doctest::Approx([&] {
          double s = 0.0;
          for (double a : e.members) s += std::abs(a - 0.7);
          return s / m;
        }()).epsilon(1e-13));
}

TEST_CASE("rng substreams are reproducible and distinct") {
  RngStream a(7, 3);
  RngStream b(7, 3);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c = RngStream(7, 3).substream(1);
  RngStream d = RngStream(7, 3).substream(2);
  CHECK(c.next_u64() != d.next_u64());
  // substreams do not advance or depend on the parent's position
  RngStream p(11, 0);
  p.uniform();
  RngStream s1 = p.substream(5);
  RngStream p2(11, 0);
  RngStream s2 = p2.substream(5);
  CHECK(s1.next_u64() == s2.next_u64());
}

TEST_CASE("uniforms stay inside the open interval") {
  RngStream rng(97, 0);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

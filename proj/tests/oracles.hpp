#pragma once

// Reference estimators used only by the tests. Everything here avoids the
// library's code paths on purpose: std::mt19937_64 for sampling, plain batch
// statistics, brute-force sums and Simpson quadrature.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Mean and standard error of draw(gen) over n iid evaluations.
template <typename Draw>
Estimate mc_mean(std::size_t n, std::uint64_t seed, Draw draw) {
  std::mt19937_64 gen(seed);
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = draw(gen);
    s += v;
    s2 += v * v;
  }
  double m = s / static_cast<double>(n);
  double var = std::max(0.0, s2 / static_cast<double>(n) - m * m);
  return {m, std::sqrt(var / static_cast<double>(n - 1))};
}

struct FourScores {
  Estimate crps;
  Estimate scrps;
  Estimate rcrps;
  Estimate rscrps;
};

// Monte-Carlo estimates of the four kernel-based scores from n_pairs iid
// pairs. The two ratio scores get delta-method standard errors from the
// moment covariances of (pair term, data term).
template <typename Draw>
FourScores four_scores_mc(std::size_t n_pairs, std::uint64_t seed, Draw draw, double y, double c) {
  std::mt19937_64 gen(seed);
  // a = |x1-x2|, b = (|x1-y| + |x2-y|)/2, and the same capped at c
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  double ta = 0, tb = 0, taa = 0, tbb = 0, tab = 0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    double x1 = draw(gen);
    double x2 = draw(gen);
    double a = std::abs(x1 - x2);
    double b = 0.5 * (std::abs(x1 - y) + std::abs(x2 - y));
    sa += a;
    sb += b;
    saa += a * a;
    sbb += b * b;
    sab += a * b;
    double at = std::min(a, c);
    double bt = 0.5 * (std::min(std::abs(x1 - y), c) + std::min(std::abs(x2 - y), c));
    ta += at;
    tb += bt;
    taa += at * at;
    tbb += bt * bt;
    tab += at * bt;
  }
  double n = static_cast<double>(n_pairs);
  auto pack = [&](double su, double sv, double suu, double svv, double suv, Estimate& lin,
                  Estimate& ratio) {
    double u = su / n, v = sv / n;
    double vu = std::max(0.0, suu / n - u * u) / n;
    double vv = std::max(0.0, svv / n - v * v) / n;
    double cuv = (suv / n - u * v) / n;
    // linear score u/2 - v
    lin.value = 0.5 * u - v;
    lin.se = std::sqrt(std::max(0.0, 0.25 * vu + vv - cuv));
    // ratio score -v/u - log(u)/2, gradient (v/u^2 - 1/(2u), -1/u)
    double gu = v / (u * u) - 0.5 / u;
    double gv = -1.0 / u;
    ratio.value = -v / u - 0.5 * std::log(u);
    ratio.se = std::sqrt(std::max(0.0, gu * gu * vu + gv * gv * vv + 2.0 * gu * gv * cuv));
  };
  FourScores out;
  pack(sa, sb, saa, sbb, sab, out.crps, out.scrps);
  pack(ta, tb, taa, tbb, tab, out.rcrps, out.rscrps);
  return out;
}

inline double gaussian_draw(std::mt19937_64& gen, double mu, double sigma) {
  std::normal_distribution<double> nd(mu, sigma);
  return nd(gen);
}

// Laplace via the difference of two exponentials, a mechanism the library
// does not use.
inline double laplace_draw(std::mt19937_64& gen, double mu, double b) {
  std::exponential_distribution<double> ed(1.0);
  return mu + b * (ed(gen) - ed(gen));
}

// Negative binomial as a gamma-mixed Poisson, mean mu and variance
// mu + mu^2/s.
inline double negbin_draw(std::mt19937_64& gen, double mu, double s) {
  std::gamma_distribution<double> gd(s, mu / s);
  std::poisson_distribution<long long> pd(gd(gen));
  return static_cast<double>(pd(gen));
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  double h = (b - a) / (2.0 * panels);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.
inline double bessel_k_quad(double nu, double x) {
  double t_hi = 3.0;
  while (x * std::cosh(t_hi) - nu * t_hi - x < 45.0) t_hi += 0.5;
  return simpson([&](double t) { return std::exp(-x * std::cosh(t)) * std::cosh(nu * t); }, 0.0,
                 t_hi, 4000);
}

// Kolmogorov-Smirnov statistic of a sample against a cdf.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

}  // namespace oracle

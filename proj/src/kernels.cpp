#include "scoring/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "scoring/numerics.hpp"

namespace scoring {

KernelSpec::KernelSpec(double alpha_, std::optional<double> trunc_)
    : alpha(alpha_), trunc(trunc_) {
  if (!(alpha > 0.0) || alpha > 2.0)
    throw std::invalid_argument("KernelSpec: alpha must lie in (0, 2]");
  if (trunc && !(*trunc > 0.0))
    throw std::invalid_argument("KernelSpec: truncation level must be positive");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::analytic: return "analytic";
    case Method::ensemble: return "ensemble";
    case Method::monte_carlo: return "monte_carlo";
    case Method::exact_sum: return "exact_sum";
  }
  return "?";
}

double kernel_eval(const KernelSpec& k, double x, double y) {
  double d = std::abs(x - y);
  double g = (k.alpha == 1.0) ? d : ((k.alpha == 2.0) ? d * d : std::pow(d, k.alpha));
  if (k.trunc) g = std::min(g, *k.trunc);
  return g;
}

double negdef_quadform(const KernelSpec& k, std::span<const double> points,
                       std::span<const double> weights) {
  if (points.size() != weights.size())
    throw DimensionMismatch("negdef_quadform: points and weights differ in length");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (std::abs(wsum) > 1e-12)
    throw WeightSumError("negdef_quadform: weights must sum to zero, got " + std::to_string(wsum));
  double q = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j)
      q += weights[i] * weights[j] * kernel_eval(k, points[i], points[j]);
  return q;
}

double e_function(double mu, double sigma, double c) {
  if (!(sigma > 0.0)) throw std::domain_error("e_function: sigma must be positive");
  if (!(c > 0.0)) throw std::domain_error("e_function: c must be positive");
  double r = mu / sigma;
  return -mu + sigma * (2.0 * std_normal_pdf(r) - std_normal_pdf((c - mu) / sigma) -
                        std_normal_pdf((c + mu) / sigma)) +
         (c - mu) * std_normal_cdf((mu - c) / sigma) + 2.0 * mu * std_normal_cdf(r) +
         (mu + c) * std_normal_cdf((-c - mu) / sigma);
}

namespace detail {

double fnorm(double mu, double sigma) {
  double r = mu / sigma;
  return 2.0 * sigma * std_normal_pdf(r) + mu * (2.0 * std_normal_cdf(r) - 1.0);
}

long long negbin_support_cut(const NegBin& nb) {
  // Smallest k with F(k) > 1 - 1e-12, found by walking the pmf recurrence.
  double ratio = nb.mu / (nb.s + nb.mu);
  double pmf = std::exp(nb.s * std::log(nb.s / (nb.s + nb.mu)));
  double cum = pmf;
  long long k = 0;
  double sd = std::sqrt(nb.mu + nb.mu * nb.mu / nb.s);
  long long k_max = static_cast<long long>(nb.mu + 80.0 * sd) + 2000;
  while (cum <= 1.0 - 1e-12 && k < k_max) {
    ++k;
    pmf *= (static_cast<double>(k) - 1.0 + nb.s) / static_cast<double>(k) * ratio;
    cum += pmf;
  }
  return k;
}

}  // namespace detail

namespace {

KernelExpectations gaussian_analytic(const KernelSpec& k, const Gaussian& g, double y) {
  KernelExpectations out;
  out.method = Method::analytic;
  if (k.alpha == 2.0 && !k.trunc) {
    out.e_pp = 2.0 * g.sigma * g.sigma;
    out.e_py = g.sigma * g.sigma + (g.mu - y) * (g.mu - y);
    return out;
  }
  if (k.trunc) {
    out.e_pp = e_function(0.0, kSqrt2 * g.sigma, *k.trunc);
    out.e_py = e_function(g.mu - y, g.sigma, *k.trunc);
    return out;
  }
  out.e_pp = detail::fnorm(0.0, kSqrt2 * g.sigma);
  out.e_py = detail::fnorm(g.mu - y, g.sigma);
  return out;
}

KernelExpectations ensemble_exact(const KernelSpec& k, const Ensemble& e, double y) {
  KernelExpectations out;
  out.method = Method::ensemble;
  if (k.alpha == 1.0 && !k.trunc) {
    out.e_pp = pairwise_mean_abs_diff(e);
    out.e_py = mean_abs_dev(e, y);
    return out;
  }
  std::size_t m = e.members.size();
  double spp = 0.0, spy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    spy += kernel_eval(k, e.members[i], y);
    for (std::size_t j = 0; j < m; ++j) spp += kernel_eval(k, e.members[i], e.members[j]);
  }
  out.e_pp = spp / (static_cast<double>(m) * static_cast<double>(m));
  out.e_py = spy / static_cast<double>(m);
  return out;
}

double negbin_epy_exact(const KernelSpec& k, const NegBin& nb, double y, long long cut) {
  double ratio = nb.mu / (nb.s + nb.mu);
  double pmf = std::exp(nb.s * std::log(nb.s / (nb.s + nb.mu)));
  double s = pmf * kernel_eval(k, 0.0, y);
  for (long long j = 1; j <= cut; ++j) {
    pmf *= (static_cast<double>(j) - 1.0 + nb.s) / static_cast<double>(j) * ratio;
    s += pmf * kernel_eval(k, static_cast<double>(j), y);
  }
  return s;
}

// E|X - X'| for integer-valued X: 2 sum_k F(k)(1 - F(k)).
double negbin_epp_exact(const NegBin& nb, long long cut) {
  double ratio = nb.mu / (nb.s + nb.mu);
  double pmf = std::exp(nb.s * std::log(nb.s / (nb.s + nb.mu)));
  double cum = pmf;
  double s = cum * (1.0 - cum);
  for (long long j = 1; j <= cut; ++j) {
    pmf *= (static_cast<double>(j) - 1.0 + nb.s) / static_cast<double>(j) * ratio;
    cum += pmf;
    s += cum * std::max(0.0, 1.0 - cum);
  }
  return 2.0 * s;
}

// Antithetic pair average for one draw of (u, v) through a quantile sampler.
template <typename Quantile>
double antithetic_pair_mean(const KernelSpec& k, Quantile q, double u, double v) {
  return 0.25 * (kernel_eval(k, q(u), q(v)) + kernel_eval(k, q(1.0 - u), q(v)) +
                 kernel_eval(k, q(u), q(1.0 - v)) + kernel_eval(k, q(1.0 - u), q(1.0 - v)));
}

KernelExpectations negbin_mixed(const KernelSpec& k, const NegBin& nb, double y, MCBudget budget,
                                RngStream& rng) {
  KernelExpectations out;
  out.method = Method::monte_carlo;
  long long cut = detail::negbin_support_cut(nb);
  out.e_py = negbin_epy_exact(k, nb, y, cut);
  // e_pp via antithetic Monte Carlo on the quantile representation.
  auto q = [&](double u) {
    double ratio = nb.mu / (nb.s + nb.mu);
    double pmf = std::exp(nb.s * std::log(nb.s / (nb.s + nb.mu)));
    double cum = pmf;
    long long kk = 0;
    while (u > cum && kk < cut + 2000) {
      ++kk;
      pmf *= (static_cast<double>(kk) - 1.0 + nb.s) / static_cast<double>(kk) * ratio;
      cum += pmf;
    }
    return static_cast<double>(kk);
  };
  std::size_t pairs = std::max<std::size_t>(1, budget.n / 2);
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    double g = antithetic_pair_mean(k, q, rng.uniform(), rng.uniform());
    s += g;
    s2 += g * g;
  }
  double m = s / static_cast<double>(pairs);
  double var = std::max(0.0, s2 / static_cast<double>(pairs) - m * m);
  out.e_pp = m;
  out.se_pp = std::sqrt(var / static_cast<double>(pairs));
  return out;
}

KernelExpectations monte_carlo(const KernelSpec& k, const Distribution& d, double y,
                               MCBudget budget, RngStream& rng) {
  KernelExpectations out;
  out.method = Method::monte_carlo;
  std::size_t n = std::max<std::size_t>(2, budget.n);
  std::vector<double> x = sample(d, n, rng);
  double spy = 0.0, spy2 = 0.0;
  for (double xi : x) {
    double g = kernel_eval(k, xi, y);
    spy += g;
    spy2 += g * g;
  }
  double npy = static_cast<double>(n);
  out.e_py = spy / npy;
  out.se_py = std::sqrt(std::max(0.0, spy2 / npy - out.e_py * out.e_py) / npy);
  // Disjoint halves of the same sample vector act as the two independent
  // copies for the pair expectation.
  std::size_t half = n / 2;
  double spp = 0.0, spp2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    double g = kernel_eval(k, x[i], x[half + i]);
    spp += g;
    spp2 += g * g;
  }
  double npp = static_cast<double>(half);
  out.e_pp = spp / npp;
  out.se_pp = std::sqrt(std::max(0.0, spp2 / npp - out.e_pp * out.e_pp) / npp);
  if (!std::isfinite(out.e_pp) || !std::isfinite(out.e_py))
    throw NonFiniteExpectation("expectations: Monte-Carlo estimate is not finite");
  return out;
}

}  // namespace

KernelExpectations expectations(const KernelSpec& k, const Distribution& d, double y,
                                MCBudget budget, RngStream rng) {
  if (const auto* g = std::get_if<Gaussian>(&d)) {
    if (k.alpha == 1.0 || (k.alpha == 2.0 && !k.trunc)) return gaussian_analytic(k, *g, y);
    return monte_carlo(k, d, y, budget, rng);
  }
  if (const auto* e = std::get_if<Ensemble>(&d)) return ensemble_exact(k, *e, y);
  if (const auto* nb = std::get_if<NegBin>(&d)) {
    long long cut = detail::negbin_support_cut(*nb);
    if (k.alpha == 1.0 && !k.trunc) {
      KernelExpectations out;
      out.method = Method::exact_sum;
      out.e_py = negbin_epy_exact(k, *nb, y, cut);
      out.e_pp = negbin_epp_exact(*nb, cut);
      return out;
    }
    return negbin_mixed(k, *nb, y, budget, rng);
  }
  return monte_carlo(k, d, y, budget, rng);
}

}  // namespace scoring

#pragma once

#include <optional>
#include <span>

#include "scoring/distributions.hpp"

namespace scoring {

// g(x, y) = |x - y|^alpha, optionally capped at level c (the robust
// truncation). Analytic paths exist only for alpha = 1; a truncated kernel
// with alpha != 1 is evaluated by Monte Carlo.
struct KernelSpec {
  explicit KernelSpec(double alpha_ = 1.0, std::optional<double> trunc_ = std::nullopt);
  double alpha;
  std::optional<double> trunc;
};

struct MCBudget {
  std::size_t n = 100000;
};

enum class Method { analytic, ensemble, monte_carlo, exact_sum };

const char* method_name(Method m);

struct KernelExpectations {
  double e_pp = 0.0;  // E_{P,P} g(X, X')
  double e_py = 0.0;  // E_P g(X, y)
  Method method = Method::analytic;
  double se_pp = 0.0;  // Monte-Carlo standard errors; zero on exact paths
  double se_py = 0.0;
};

double kernel_eval(const KernelSpec& k, double x, double y);

// sum_{i,j} w_i w_j g(x_i, x_j). Throws WeightSumError unless the weights sum
// to zero within 1e-12; negative definiteness means the value is <= 0.
double negdef_quadform(const KernelSpec& k, std::span<const double> points,
                       std::span<const double> weights);

// E[min(|X|, c)] for X ~ N(mu, sigma^2); the building block of the robust
// closed forms.
double e_function(double mu, double sigma, double c);

// Kernel expectations for a predictive distribution at observation y.
// Dispatch: Gaussian alpha=1 (plain or truncated) and Gaussian alpha=2 are
// closed-form; ensembles use exact sums over members; NegBin uses exact sums
// over the support (tail cut at cdf > 1 - 1e-12), falling back to antithetic
// Monte Carlo for e_pp when alpha != 1 or truncated; everything else is
// Monte Carlo with the sample split into disjoint halves for the pair term.
KernelExpectations expectations(const KernelSpec& k, const Distribution& d, double y,
                                MCBudget budget, RngStream rng);

namespace detail {
// E|X - y| for X ~ N(mu, sigma^2) is fnorm(mu - y, sigma).
double fnorm(double mu, double sigma);
long long negbin_support_cut(const NegBin& nb);
}  // namespace detail

}  // namespace scoring

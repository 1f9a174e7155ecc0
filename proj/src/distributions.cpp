#include "scoring/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scoring/numerics.hpp"

namespace scoring {

Gaussian::Gaussian(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
    throw ConfigError("Gaussian: sigma must be positive and parameters finite");
}

Laplace::Laplace(double mu_, double b_) : mu(mu_), b(b_) {
  if (!(b > 0.0) || !std::isfinite(mu) || !std::isfinite(b))
    throw ConfigError("Laplace: b must be positive and parameters finite");
}

NegBin::NegBin(double mu_, double s_) : mu(mu_), s(s_) {
  if (!(mu > 0.0) || !(s > 0.0))
    throw ConfigError("NegBin: mu and s must be positive");
}

Ensemble::Ensemble(std::vector<double> members_) : members(std::move(members_)) {
  if (members.empty()) throw ConfigError("Ensemble: needs at least one member");
  for (double m : members)
    if (!std::isfinite(m)) throw ConfigError("Ensemble: members must be finite");
}

LocationScale::LocationScale(Distribution base_, double mu_, double sigma_)
    : base(std::make_shared<Distribution>(std::move(base_))), mu(mu_), sigma(sigma_) {
  if (!(sigma > 0.0) || !std::isfinite(mu))
    throw ConfigError("LocationScale: sigma must be positive and mu finite");
}

namespace detail {

bool is_nonneg_integer(double y) {
  return y >= 0.0 && std::isfinite(y) && std::abs(y - std::round(y)) <= 1e-9;
}

}  // namespace detail

double negbin_pmf(const NegBin& nb, long long k) {
  if (k < 0) return 0.0;
  double y = static_cast<double>(k);
  double lp = std::lgamma(y + nb.s) - std::lgamma(nb.s) - std::lgamma(y + 1.0) +
              nb.s * std::log(nb.s / (nb.s + nb.mu)) + y * std::log(nb.mu / (nb.s + nb.mu));
  return std::exp(lp);
}

namespace {

double laplace_quantile(const Laplace& d, double u) {
  if (u < 0.5) return d.mu + d.b * std::log(2.0 * u);
  return d.mu - d.b * std::log(2.0 * (1.0 - u));
}

// Sequential-search inversion on the pmf recurrence. One uniform per draw.
long long negbin_quantile(const NegBin& nb, double u) {
  double r = nb.mu / (nb.s + nb.mu);
  double pmf = std::exp(nb.s * std::log(nb.s / (nb.s + nb.mu)));
  double cum = pmf;
  long long k = 0;
  // Far beyond any plausible tail mass; terminates degenerate loops where the
  // running sum has absorbed all representable mass.
  double sd = std::sqrt(nb.mu + nb.mu * nb.mu / nb.s);
  long long k_max = static_cast<long long>(nb.mu + 60.0 * sd) + 1000;
  while (u > cum && k < k_max) {
    ++k;
    pmf *= (static_cast<double>(k) - 1.0 + nb.s) / static_cast<double>(k) * r;
    cum += pmf;
  }
  return k;
}

}  // namespace

double sample_one(const Distribution& d, RngStream& rng) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return v.mu + v.sigma * rng.normal();
        } else if constexpr (std::is_same_v<T, Laplace>) {
          return laplace_quantile(v, rng.uniform());
        } else if constexpr (std::is_same_v<T, NegBin>) {
          return static_cast<double>(negbin_quantile(v, rng.uniform()));
        } else if constexpr (std::is_same_v<T, Ensemble>) {
          auto m = v.members.size();
          auto idx = std::min<std::size_t>(m - 1, static_cast<std::size_t>(rng.uniform() * m));
          return v.members[idx];
        } else {
          return v.mu + v.sigma * sample_one(*v.base, rng);
        }
      },
      d);
}

std::vector<double> sample(const Distribution& d, std::size_t n, RngStream& rng) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sample_one(d, rng);
  return out;
}

double log_pdf(const Distribution& d, double y) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          double z = (y - v.mu) / v.sigma;
          return -0.5 * std::log(2.0 * kPi) - std::log(v.sigma) - 0.5 * z * z;
        } else if constexpr (std::is_same_v<T, Laplace>) {
          return -std::abs(y - v.mu) / v.b - std::log(2.0 * v.b);
        } else if constexpr (std::is_same_v<T, NegBin>) {
          if (!detail::is_nonneg_integer(y))
            throw SupportError("log_pdf: NegBin support is the nonnegative integers, got y=" +
                               std::to_string(y));
          double k = std::round(y);
          return std::lgamma(k + v.s) - std::lgamma(v.s) - std::lgamma(k + 1.0) +
                 v.s * std::log(v.s / (v.s + v.mu)) + k * std::log(v.mu / (v.s + v.mu));
        } else if constexpr (std::is_same_v<T, Ensemble>) {
          throw UnsupportedDistribution("log_pdf: ensembles carry no density");
        } else {
          if (std::holds_alternative<NegBin>(*v.base) || std::holds_alternative<Ensemble>(*v.base))
            throw UnsupportedDistribution("log_pdf: LocationScale density needs a continuous base");
          return log_pdf(*v.base, (y - v.mu) / v.sigma) - std::log(v.sigma);
        }
      },
      d);
}

double cdf(const Distribution& d, double y) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return std_normal_cdf((y - v.mu) / v.sigma);
        } else if constexpr (std::is_same_v<T, Laplace>) {
          double z = (y - v.mu) / v.b;
          return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
        } else if constexpr (std::is_same_v<T, NegBin>) {
          if (y < 0.0) return 0.0;
          double r = v.mu / (v.s + v.mu);
          double pmf = std::exp(v.s * std::log(v.s / (v.s + v.mu)));
          double cum = pmf;
          long long kmax = static_cast<long long>(std::floor(y));
          for (long long k = 1; k <= kmax; ++k) {
            pmf *= (static_cast<double>(k) - 1.0 + v.s) / static_cast<double>(k) * r;
            cum += pmf;
            if (pmf < 1e-18 && cum > 1.0 - 1e-15) break;
          }
          return std::min(cum, 1.0);
        } else if constexpr (std::is_same_v<T, Ensemble>) {
          auto cnt = std::count_if(v.members.begin(), v.members.end(),
                                   [&](double m) { return m <= y; });
          return static_cast<double>(cnt) / static_cast<double>(v.members.size());
        } else {
          return cdf(*v.base, (y - v.mu) / v.sigma);
        }
      },
      d);
}

double mean(const Distribution& d) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return v.mu;
        } else if constexpr (std::is_same_v<T, Laplace>) {
          return v.mu;
        } else if constexpr (std::is_same_v<T, NegBin>) {
          return v.mu;
        } else if constexpr (std::is_same_v<T, Ensemble>) {
          double s = 0.0;
          for (double m : v.members) s += m;
          return s / static_cast<double>(v.members.size());
        } else {
          return v.mu + v.sigma * mean(*v.base);
        }
      },
      d);
}

double variance(const Distribution& d) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return v.sigma * v.sigma;
        } else if constexpr (std::is_same_v<T, Laplace>) {
          return 2.0 * v.b * v.b;
        } else if constexpr (std::is_same_v<T, NegBin>) {
          return v.mu + v.mu * v.mu / v.s;
        } else if constexpr (std::is_same_v<T, Ensemble>) {
          // Plug-in (divide by m) to match the pairwise expectation convention.
          double mu = 0.0;
          for (double m : v.members) mu += m;
          mu /= static_cast<double>(v.members.size());
          double s = 0.0;
          for (double m : v.members) s += (m - mu) * (m - mu);
          return s / static_cast<double>(v.members.size());
        } else {
          return v.sigma * v.sigma * variance(*v.base);
        }
      },
      d);
}

double pairwise_mean_abs_diff(const Ensemble& e, bool unbiased) {
  std::vector<double> x = e.members;
  std::sort(x.begin(), x.end());
  double m = static_cast<double>(x.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += (2.0 * (static_cast<double>(i) + 1.0) - m - 1.0) * x[i];
  }
  double denom = unbiased ? m * (m - 1.0) : m * m;
  if (denom == 0.0) return 0.0;  // single-member ensemble under the unbiased divisor
  return 2.0 * s / denom;
}

double mean_abs_dev(const Ensemble& e, double y) {
  double s = 0.0;
  for (double m : e.members) s += std::abs(m - y);
  return s / static_cast<double>(e.members.size());
}

}  // namespace scoring

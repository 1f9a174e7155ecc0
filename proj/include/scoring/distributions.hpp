#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "scoring/errors.hpp"
#include "scoring/rng.hpp"

namespace scoring {

struct Gaussian {
  Gaussian(double mu_, double sigma_);
  double mu, sigma;
};

struct Laplace {
  Laplace(double mu_, double b_);
  double mu, b;
};

// Mean/dispersion parameterization: variance = mu + mu^2/s.
struct NegBin {
  NegBin(double mu_, double s_);
  double mu, s;
};

struct Ensemble {
  explicit Ensemble(std::vector<double> members_);
  std::vector<double> members;
};

struct LocationScale;

using Distribution = std::variant<Gaussian, Laplace, NegBin, Ensemble, LocationScale>;

// mu + sigma * X for X ~ base. Densities are only defined for continuous
// bases; sampling and CDF work for any base.
struct LocationScale {
  LocationScale(Distribution base_, double mu_, double sigma_);
  std::shared_ptr<const Distribution> base;
  double mu, sigma;
};

double sample_one(const Distribution& d, RngStream& rng);
std::vector<double> sample(const Distribution& d, std::size_t n, RngStream& rng);

// log density (or log pmf). Throws UnsupportedDistribution for ensembles and
// SupportError off the support of a discrete distribution.
double log_pdf(const Distribution& d, double y);

double cdf(const Distribution& d, double y);

double mean(const Distribution& d);
double variance(const Distribution& d);

// (1/m^2) sum_{i,j} |x_i - x_j| via the sorted representation, O(m log m).
// unbiased=true switches the divisor to m(m-1).
double pairwise_mean_abs_diff(const Ensemble& e, bool unbiased = false);

// (1/m) sum_i |x_i - y|.
double mean_abs_dev(const Ensemble& e, double y);

// NegBin pmf by stable recurrence; used by the exact-sum score paths.
double negbin_pmf(const NegBin& nb, long long k);

namespace detail {
bool is_nonneg_integer(double y);
}

}  // namespace scoring

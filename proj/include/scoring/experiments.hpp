#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "scoring/scores.hpp"

namespace scoring {

struct WilsonInterval {
  double center = 0.0;
  double halfwidth = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// 95% score interval for a binomial proportion.
WilsonInterval wilson_interval(std::size_t successes, std::size_t n);

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct SelectionRow {
  std::string rule;
  double delta = 0.0;
  std::size_t correct = 0;
  std::size_t replicates = 0;
  double prob = 0.0;
  WilsonInterval wilson;
};

struct SelectionCurve {
  std::vector<SelectionRow> rows;
  const SelectionRow& at(const std::string& rule, double delta) const;
};

// AR(1) log-volatility: x_t = a x_{t-1} + eps_x, y_t = eps_y * exp(x_t);
// candidate forecasts N(0, (sigma_y^2 +/- delta) exp(2 x_t)) against the true
// sigma_y. A replicate counts as correct for a rule when the true model's
// average score strictly beats both alternatives.
struct VolatilityConfig {
  double a = 0.95;
  double sigma_x = 0.5;
  double sigma_y = 1.0;
  std::size_t series_len = 600;
  std::size_t replicates = 200;
  std::vector<double> delta_grid{0.1, 0.2, 0.3, 0.4};
  std::vector<std::string> rules{"crps", "scrps", "logs"};
  std::uint64_t seed = 1;
};

SelectionCurve run_volatility(const VolatilityConfig& cfg);

// Matern covariance sigma^2/(2^{nu-1} Gamma(nu)) (kappa h)^nu K_nu(kappa h).
double matern_cov(double h, double kappa, double sigma, double nu);

struct MaternParams {
  double kappa = 50.0;
  double sigma = 1.0;
  double nu = 3.0;
};

// Leave-one-out conditionals N(mu_i, sigma_i^2) for a Gaussian field with the
// given covariance, via the precision-matrix identity (one factorization).
std::vector<Gaussian> loo_kriging(const std::vector<std::array<double, 2>>& locations,
                                  const std::vector<double>& values, const MaternParams& params);

struct OutlierSpec {
  std::size_t count = 1;
  double noise_sd = 5.0;
};

struct SpatialConfig {
  std::size_t n_locations = 100;
  MaternParams params{};
  std::vector<double> delta_grid{5.0, 10.0, 20.0};  // kappa offsets
  std::size_t replicates = 300;
  std::optional<OutlierSpec> outlier;
  std::vector<std::string> rules{"crps", "rcrps:c=2", "scrps", "rscrps:c=2", "logs"};
  std::uint64_t seed = 2;
};

SelectionCurve run_spatial(const SpatialConfig& cfg);

struct NegBinFit {
  std::vector<double> theta;
  std::vector<double> theta_se;
  double s = 1.0;
  double loglik = 0.0;
  std::size_t iterations = 0;
};

// Maximum likelihood for counts with log link and variance mu + mu^2/s:
// Fisher-scoring steps on theta alternated with golden-section refinement of
// log s. Throws NonConvergence after 200 outer rounds.
NegBinFit fit_negbin(const std::vector<std::vector<double>>& x_rows,
                     const std::vector<double>& y);

struct NbRegConfig {
  std::size_t n_obs = 2000;
  std::size_t k_covariates = 10;
  // Coefficient scale chosen so the simulated means span about three decades.
  std::vector<double> theta{1.0, -0.8, 0.7, -0.5, 0.9, 0.4, -0.6, 0.3, -0.2, 0.5};
  double s = 5.0;
  std::uint64_t seed = 3;
};

struct NbRegResult {
  NegBinFit fit;
  struct Obs {
    double y = 0.0;
    double mu_hat = 0.0;
    double crps = 0.0;
    double scrps = 0.0;
    double raw_residual = 0.0;
    double scaled_residual = 0.0;
  };
  std::vector<Obs> per_obs;
  struct TopK {
    std::size_t k = 0;
    double crps_ratio = 0.0;   // mean score of k smallest-mu_hat obs / overall mean
    double scrps_ratio = 0.0;
  };
  std::vector<TopK> topk;
  double rho_crps_raw = 0.0;
  double rho_crps_scaled = 0.0;
  double rho_scrps_raw = 0.0;
  double rho_scrps_scaled = 0.0;
};

NbRegResult run_nbreg(const NbRegConfig& cfg);

// Expected-average-score surfaces for the two-observation example: one sheet
// over per-observation scale misspecification (sigma-hat/sigma ratios) and
// one over mean misspecification parameterized by p = Phi(mu-hat/sigma).
struct SurfaceConfig {
  double sigma1 = 0.1;
  double sigma2 = 1.0;
  std::size_t grid_n = 41;
  double ratio_lo = 0.5;
  double ratio_hi = 2.0;
  double p_lo = 0.02;
  double p_hi = 0.98;
  std::vector<std::string> rules{"crps", "logs", "scrps"};
};

struct SurfaceResult {
  std::vector<double> ratio_grid;
  std::vector<double> p_grid;
  // rule -> grid_n x grid_n matrix, first index is the sigma1 (or p1) axis.
  std::map<std::string, std::vector<std::vector<double>>> sigma_surface;
  std::map<std::string, std::vector<std::vector<double>>> mu_surface;
};

SurfaceResult figure1_surfaces(const SurfaceConfig& cfg);

// One simulated volatility path with the per-observation decomposition
// score = entropy + residual for crps, scrps and the log score.
struct EntropyTraceConfig {
  double a = 0.95;
  double sigma_x = 0.5;
  double sigma_y = 1.0;
  std::size_t series_len = 300;
  std::uint64_t seed = 4;
};

struct EntropyTraceResult {
  struct Row {
    double x = 0.0;
    double y = 0.0;
    double crps = 0.0, crps_entropy = 0.0, crps_residual = 0.0;
    double scrps = 0.0, scrps_entropy = 0.0, scrps_residual = 0.0;
    double logs = 0.0, logs_entropy = 0.0, logs_residual = 0.0;
  };
  std::vector<Row> rows;
};

EntropyTraceResult entropy_decomposition_trace(const EntropyTraceConfig& cfg);

}  // namespace scoring

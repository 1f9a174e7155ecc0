#pragma once

#include <array>

#include "scoring/scores.hpp"

namespace scoring {

// Probe for the local expansion
//   S(Q_theta, Q_theta) - S(Q_{theta + t*sigma*r}, Q_theta) ~ s * t^p,
// where Q_theta is the location-scale family of `base` at theta = (mu, sigma)
// and r is a direction in (mu, sigma) space.
struct ScaleProbe {
  Distribution base{Gaussian(0.0, 1.0)};
  double mu = 0.0;
  double sigma = 1.0;
  std::array<double, 2> direction{0.0, 1.0};
  std::vector<double> t_grid{0.2, 0.1, 0.05, 0.025};
};

struct ScaleFit {
  double s_hat = 0.0;  // curvature coefficient, extrapolated at the p = 2 rate
  double p_hat = 0.0;  // raw log-log slope from the two smallest t
  std::vector<double> t;
  std::vector<double> d;   // score drops D(t)
  std::vector<double> se;  // MC standard errors of each drop (zero on analytic paths)
};

// Gaussian bases with a closed-form expected score are evaluated
// analytically; other bases fall back to common-random-number Monte Carlo.
// Throws NoiseDominated when the MC error swamps the smallest drop.
ScaleFit estimate_scale_function(const RuleSpec& rule, const ScaleProbe& probe,
                                 const ScoreEnv& env = {});

struct InvarianceResult {
  std::vector<double> sigmas;
  std::vector<double> s_hats;
  std::vector<double> p_hats;
  double spread = 0.0;          // (max - min)/mean of s_hat across sigmas
  double sigma_exponent = 0.0;  // least-squares slope of log s_hat vs log sigma
};

// Runs the scale probe across sigma_grid; a locally scale-invariant rule has
// spread <= 5% (sigma_exponent near 0), the CRPS family shows exponent near 1.
InvarianceResult local_invariance_check(const RuleSpec& rule, const Distribution& base,
                                        std::array<double, 2> direction,
                                        const std::vector<double>& sigma_grid,
                                        const ScoreEnv& env = {});

// Least-squares slope of log |S(P, y)| against log y over the top half of a
// geometric y grid; the tail-sensitivity exponent.
double estimate_sensitivity(const RuleSpec& rule, const Distribution& d,
                            const std::vector<double>& y_grid, const ScoreEnv& env = {});

struct SweepResult {
  double best_mu = 0.0;
  double best_sigma = 0.0;
  double best_value = 0.0;
  bool truth_is_argmax = false;
};

// Expected-score argmax over a forecast grid that contains the truth; a
// proper rule must put the argmax at the truth.
SweepResult propriety_sweep(const RuleSpec& rule, const Gaussian& truth,
                            const std::vector<double>& mu_grid,
                            const std::vector<double>& sigma_grid);

// 41x41 default grid centered on the truth: mu in truth.mu +/- truth.sigma,
// sigma log-spaced over [truth.sigma/2, 2*truth.sigma]; both contain the
// truth exactly.
void make_sweep_grid(const Gaussian& truth, std::size_t n, std::vector<double>& mu_grid,
                     std::vector<double>& sigma_grid);

}  // namespace scoring

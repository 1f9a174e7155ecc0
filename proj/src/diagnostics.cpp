#include "scoring/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "scoring/numerics.hpp"

namespace scoring {

namespace {

bool has_gaussian_closed_form(const RuleSpec& rule) {
  switch (rule.rule) {
    case Rule::crps:
    case Rule::scrps:
    case Rule::rcrps:
    case Rule::rscrps:
    case Rule::logs:
    case Rule::dss: return true;
    default: return false;
  }
}

struct ExpectedScore {
  double value;
  double se;
};

// Expected score of the location-scale forecast (mu_f, sigma_f) of `base`
// under the data distribution (mu_t, sigma_t) of the same base.
class ProbeEvaluator {
public:
  ProbeEvaluator(const RuleSpec& rule, const Distribution& base, double mu_t, double sigma_t,
                 const ScoreEnv& env)
      : rule_(rule), base_(base), mu_t_(mu_t), sigma_t_(sigma_t) {
    const auto* g = std::get_if<Gaussian>(&base_);
    analytic_ = g != nullptr && has_gaussian_closed_form(rule_);
    if (analytic_) {
      base_mu_ = g->mu;
      base_sigma_ = g->sigma;
      return;
    }
    if (rule_.rule != Rule::crps && rule_.rule != Rule::scrps && rule_.rule != Rule::logs &&
        rule_.rule != Rule::dss) {
      throw UnsupportedDistribution(
          "estimate_scale_function: Monte-Carlo probes support crps, scrps, logs, dss");
    }
    // Common random numbers: one base sample represents every forecast in the
    // probe, one draw vector represents the data distribution.
    RngStream rng(env.seed);
    auto member_rng = rng.substream(1);
    auto data_rng = rng.substream(2);
    std::size_t m = std::max<std::size_t>(env.budget.n, 1000);
    members_ = sample(base_, m, member_rng);
    std::sort(members_.begin(), members_.end());
    prefix_.resize(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) prefix_[i + 1] = prefix_[i] + members_[i];
    Ensemble e(members_);
    base_epp_ = pairwise_mean_abs_diff(e);
    base_mean_ = mean(base_);
    base_var_ = variance(base_);
    std::size_t n = std::max<std::size_t>(env.budget.n, 1000);
    std::vector<double> z = sample(base_, n, data_rng);
    ys_.resize(n);
    for (std::size_t i = 0; i < n; ++i) ys_[i] = mu_t_ + sigma_t_ * z[i];
  }

  // E_{Y ~ Q_theta} S(P_{mu_f, sigma_f}, Y); per-draw values out for the
  // paired-difference noise estimate.
  ExpectedScore eval(double mu_f, double sigma_f, std::vector<double>* per_draw = nullptr) const {
    if (analytic_) {
      Gaussian forecast(mu_f + sigma_f * base_mu_, sigma_f * base_sigma_);
      Gaussian truth(mu_t_ + sigma_t_ * base_mu_, sigma_t_ * base_sigma_);
      if (per_draw) per_draw->clear();
      return {expected_gaussian_score(rule_, forecast, truth), 0.0};
    }
    double epp = sigma_f * base_epp_;
    double fmean = mu_f + sigma_f * base_mean_;
    double fvar = sigma_f * sigma_f * base_var_;
    Distribution forecast{LocationScale(base_, mu_f, sigma_f)};
    double sum = 0.0, sum2 = 0.0;
    if (per_draw) per_draw->resize(ys_.size());
    for (std::size_t i = 0; i < ys_.size(); ++i) {
      double s;
      switch (rule_.rule) {
        case Rule::crps: s = 0.5 * epp - epy(mu_f, sigma_f, ys_[i]); break;
        case Rule::scrps:
          s = -epy(mu_f, sigma_f, ys_[i]) / epp - 0.5 * std::log(epp);
          break;
        case Rule::logs:
          s = log_pdf(forecast, ys_[i]);
          break;
        default:
          s = -(ys_[i] - fmean) * (ys_[i] - fmean) / (2.0 * fvar) - 0.5 * std::log(fvar);
      }
      sum += s;
      sum2 += s * s;
      if (per_draw) (*per_draw)[i] = s;
    }
    double n = static_cast<double>(ys_.size());
    double m = sum / n;
    double var = std::max(0.0, sum2 / n - m * m);
    return {m, std::sqrt(var / n)};
  }

  bool analytic() const { return analytic_; }
  std::size_t draws() const { return ys_.size(); }

private:
  // Mean absolute deviation of the affine ensemble around y, O(log m).
  double epy(double mu_f, double sigma_f, double y) const {
    double z = (y - mu_f) / sigma_f;
    auto it = std::upper_bound(members_.begin(), members_.end(), z);
    std::size_t k = static_cast<std::size_t>(it - members_.begin());
    double m = static_cast<double>(members_.size());
    double below = static_cast<double>(k) * z - prefix_[k];
    double above = (prefix_.back() - prefix_[k]) - (m - static_cast<double>(k)) * z;
    return sigma_f * (below + above) / m;
  }

  RuleSpec rule_;
  Distribution base_;
  double mu_t_, sigma_t_;
  bool analytic_ = false;
  double base_mu_ = 0.0, base_sigma_ = 1.0;
  std::vector<double> members_;
  std::vector<double> prefix_;
  double base_epp_ = 0.0, base_mean_ = 0.0, base_var_ = 0.0;
  std::vector<double> ys_;
};

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ScaleFit estimate_scale_function(const RuleSpec& rule, const ScaleProbe& probe,
                                 const ScoreEnv& env) {
  if (probe.t_grid.size() < 2)
    throw ConfigError("estimate_scale_function: need at least two t values");
  ProbeEvaluator eval(rule, probe.base, probe.mu, probe.sigma, env);

  ScaleFit fit;
  fit.t = probe.t_grid;
  std::sort(fit.t.begin(), fit.t.end(), std::greater<double>());

  std::vector<double> at_truth;
  ExpectedScore s0 = eval.eval(probe.mu, probe.sigma, eval.analytic() ? nullptr : &at_truth);
  std::vector<double> at_t;
  for (double t : fit.t) {
    double mu_f = probe.mu + t * probe.sigma * probe.direction[0];
    double sigma_f = probe.sigma * (1.0 + t * probe.direction[1]);
    if (!(sigma_f > 0.0))
      throw ConfigError("estimate_scale_function: perturbed sigma is not positive");
    ExpectedScore st = eval.eval(mu_f, sigma_f, eval.analytic() ? nullptr : &at_t);
    fit.d.push_back(s0.value - st.value);
    if (eval.analytic()) {
      fit.se.push_back(0.0);
    } else {
      // Paired differences: the common draws cancel most of the noise.
      double sum = 0.0, sum2 = 0.0;
      for (std::size_t i = 0; i < at_t.size(); ++i) {
        double diff = at_truth[i] - at_t[i];
        sum += diff;
        sum2 += diff * diff;
      }
      double n = static_cast<double>(at_t.size());
      double m = sum / n;
      fit.se.push_back(std::sqrt(std::max(0.0, sum2 / n - m * m) / n));
    }
  }

  std::size_t last = fit.t.size() - 1;
  double d3 = fit.d[last - 1], d4 = fit.d[last];
  double t3 = fit.t[last - 1], t4 = fit.t[last];
  double noise = std::max(fit.se[last - 1], fit.se[last]);
  double signal = std::min(std::abs(d3), std::abs(d4));
  if (noise > 0.5 * signal)
    throw NoiseDominated("estimate_scale_function: MC error " + std::to_string(noise) +
                         " exceeds half of the smallest score drop " + std::to_string(signal));
  if (!(d3 > 0.0) || !(d4 > 0.0))
    throw NoiseDominated("estimate_scale_function: nonpositive score drop; propriety violated "
                         "or noise dominated");
  fit.p_hat = std::log(d3 / d4) / std::log(t3 / t4);
  // Richardson step at the theoretical quadratic rate: extrapolate D(t)/t^2
  // linearly to t = 0 to strip the cubic term.
  double f3 = d3 / (t3 * t3), f4 = d4 / (t4 * t4);
  fit.s_hat = f4 + (f4 - f3) * t4 / (t3 - t4);
  return fit;
}

InvarianceResult local_invariance_check(const RuleSpec& rule, const Distribution& base,
                                        std::array<double, 2> direction,
                                        const std::vector<double>& sigma_grid,
                                        const ScoreEnv& env) {
  if (sigma_grid.size() < 2)
    throw ConfigError("local_invariance_check: need at least two sigma values");
  InvarianceResult out;
  out.sigmas = sigma_grid;
  for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
    ScaleProbe probe;
    probe.base = base;
    probe.mu = 0.0;
    probe.sigma = sigma_grid[i];
    probe.direction = direction;
    ScoreEnv probe_env = env;
    probe_env.seed = RngStream(env.seed).substream(i).key();
    ScaleFit fit = estimate_scale_function(rule, probe, probe_env);
    out.s_hats.push_back(fit.s_hat);
    out.p_hats.push_back(fit.p_hat);
  }
  double lo = *std::min_element(out.s_hats.begin(), out.s_hats.end());
  double hi = *std::max_element(out.s_hats.begin(), out.s_hats.end());
  double mean_s = 0.0;
  for (double s : out.s_hats) mean_s += s;
  mean_s /= static_cast<double>(out.s_hats.size());
  out.spread = (hi - lo) / std::abs(mean_s);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
    if (!(out.s_hats[i] > 0.0))
      throw NoiseDominated("local_invariance_check: nonpositive curvature estimate");
    lx.push_back(std::log(sigma_grid[i]));
    ly.push_back(std::log(out.s_hats[i]));
  }
  out.sigma_exponent = lsq_slope(lx, ly);
  return out;
}

double estimate_sensitivity(const RuleSpec& rule, const Distribution& d,
                            const std::vector<double>& y_grid, const ScoreEnv& env) {
  if (y_grid.size() < 2) throw ConfigError("estimate_sensitivity: need at least two y values");
  std::vector<double> ys = y_grid;
  std::sort(ys.begin(), ys.end());
  std::size_t half = (ys.size() + 1) / 2;
  std::vector<double> lx, ly;
  for (std::size_t i = ys.size() - std::max<std::size_t>(half, 2); i < ys.size(); ++i) {
    ScoreEnv obs_env = env;
    obs_env.seed = RngStream(env.seed).substream(i).key();
    double s = score(rule, d, ys[i], obs_env).value;
    if (!(std::abs(s) > 0.0))
      throw NoiseDominated("estimate_sensitivity: score vanishes on the grid tail");
    lx.push_back(std::log(std::abs(ys[i])));
    ly.push_back(std::log(std::abs(s)));
  }
  return lsq_slope(lx, ly);
}

SweepResult propriety_sweep(const RuleSpec& rule, const Gaussian& truth,
                            const std::vector<double>& mu_grid,
                            const std::vector<double>& sigma_grid) {
  SweepResult out;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t ties = 0;
  for (double m : mu_grid) {
    for (double s : sigma_grid) {
      double v = expected_gaussian_score(rule, Gaussian(m, s), truth);
      if (v > best) {
        best = v;
        out.best_mu = m;
        out.best_sigma = s;
        ties = 1;
      } else if (v == best) {
        ++ties;
      }
    }
  }
  out.best_value = best;
  out.truth_is_argmax =
      ties == 1 && out.best_mu == truth.mu && out.best_sigma == truth.sigma;
  return out;
}

void make_sweep_grid(const Gaussian& truth, std::size_t n, std::vector<double>& mu_grid,
                     std::vector<double>& sigma_grid) {
  if (n < 3 || n % 2 == 0) throw ConfigError("make_sweep_grid: n must be odd and >= 3");
  mu_grid.clear();
  sigma_grid.clear();
  double half = static_cast<double>(n - 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    double u = (static_cast<double>(i) - half) / half;  // [-1, 1], 0 at center
    mu_grid.push_back(truth.mu + u * truth.sigma);
    sigma_grid.push_back(truth.sigma * std::exp2(u));
  }
  mu_grid[static_cast<std::size_t>(half)] = truth.mu;        // exact center
  sigma_grid[static_cast<std::size_t>(half)] = truth.sigma;  // despite rounding
}

}  // namespace scoring

#include "scoring/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "scoring/numerics.hpp"
#include "scoring/rng.hpp"

namespace scoring {

namespace {

constexpr double kZ95 = 1.959964;  // Phi(z) = 0.975

std::vector<RuleSpec> parse_rules(const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("rule list is empty");
  std::vector<RuleSpec> specs;
  specs.reserve(names.size());
  for (const auto& n : names) specs.push_back(RuleSpec::parse(n));
  return specs;
}

// Average ranks (1-based), ties share the mean rank.
std::vector<double> ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = shared;
    i = j + 1;
  }
  return r;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

constexpr double kEtaClamp = 30.0;

double clamp_eta(double eta) { return std::clamp(eta, -kEtaClamp, kEtaClamp); }

double negbin_loglik(const std::vector<double>& eta, const std::vector<double>& y, double s) {
  double ll = 0.0;
  const double lgs = std::lgamma(s);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double mu = std::exp(eta[i]);
    ll += std::lgamma(y[i] + s) - lgs - std::lgamma(y[i] + 1.0) + s * std::log(s / (s + mu)) +
          y[i] * (eta[i] - std::log(s + mu));
  }
  return ll;
}

// Maximizes f over [lo, hi] assuming unimodality.
double golden_max(double lo, double hi, double tol, const std::function<double(double)>& f) {
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

WilsonInterval wilson_interval(std::size_t successes, std::size_t n) {
  if (n == 0) throw ConfigError("wilson interval needs n > 0");
  if (successes > n) throw ConfigError("wilson interval: successes exceed trials");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / nn;
  WilsonInterval w;
  w.center = (p + z2 / (2.0 * nn)) / denom;
  w.halfwidth = kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  w.lo = w.center - w.halfwidth;
  w.hi = w.center + w.halfwidth;
  return w;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("spearman: length mismatch");
  if (a.size() < 2) throw ConfigError("spearman needs at least two points");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double ma = mean_of(ra), mb = mean_of(rb);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - ma, db = rb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw DegenerateDistribution("spearman: constant input");
  return sab / std::sqrt(saa * sbb);
}

const SelectionRow& SelectionCurve::at(const std::string& rule, double delta) const {
  for (const auto& r : rows)
    if (r.rule == rule && r.delta == delta) return r;
  throw ConfigError("no selection row for rule " + rule);
}

SelectionCurve run_volatility(const VolatilityConfig& cfg) {
  if (!(std::abs(cfg.a) < 1.0)) throw ConfigError("volatility: |a| must be < 1");
  if (cfg.sigma_x < 0.0 || !(cfg.sigma_y > 0.0))
    throw ConfigError("volatility: noise scales out of range");
  if (cfg.series_len == 0 || cfg.replicates == 0) throw ConfigError("volatility: empty design");
  if (cfg.delta_grid.empty()) throw ConfigError("volatility: empty delta grid");
  for (double d : cfg.delta_grid)
    if (!(d > 0.0) || d >= cfg.sigma_y * cfg.sigma_y)
      throw ConfigError("volatility: deltas must lie in (0, sigma_y^2)");
  const auto specs = parse_rules(cfg.rules);

  // Candidate scale multipliers: the true one first, then the +/- pair per
  // delta. The misspecification acts on the observation variance, so the
  // candidate multipliers are sqrt(sigma_y^2 +/- delta).
  std::vector<double> sigmas{cfg.sigma_y};
  for (double d : cfg.delta_grid) {
    sigmas.push_back(std::sqrt(cfg.sigma_y * cfg.sigma_y + d));
    sigmas.push_back(std::sqrt(cfg.sigma_y * cfg.sigma_y - d));
  }

  std::vector<std::vector<std::size_t>> correct(
      specs.size(), std::vector<std::size_t>(cfg.delta_grid.size(), 0));
  std::vector<std::vector<double>> sum_score(specs.size(),
                                             std::vector<double>(sigmas.size(), 0.0));
  const double sd0 = cfg.sigma_x / std::sqrt(1.0 - cfg.a * cfg.a);

  for (std::size_t rep = 0; rep < cfg.replicates; ++rep) try {
      RngStream rng(cfg.seed, rep);
      for (auto& v : sum_score) std::fill(v.begin(), v.end(), 0.0);
      double x = sd0 * rng.normal();
      for (std::size_t t = 0; t < cfg.series_len; ++t) {
        x = cfg.a * x + cfg.sigma_x * rng.normal();
        const double vol = std::exp(x);
        const double y = cfg.sigma_y * vol * rng.normal();
        for (std::size_t s = 0; s < sigmas.size(); ++s) {
          const Distribution fc{Gaussian{0.0, sigmas[s] * vol}};
          for (std::size_t r = 0; r < specs.size(); ++r)
            sum_score[r][s] += score(specs[r], fc, y).value;
        }
      }
      for (std::size_t r = 0; r < specs.size(); ++r)
        for (std::size_t d = 0; d < cfg.delta_grid.size(); ++d) {
          const double truth = sum_score[r][0];
          if (truth > sum_score[r][1 + 2 * d] && truth > sum_score[r][2 + 2 * d])
            ++correct[r][d];
        }
    } catch (const Error& e) {
      rethrow_with_context(e, "replicate " + std::to_string(rep));
    }

  SelectionCurve curve;
  for (std::size_t r = 0; r < specs.size(); ++r)
    for (std::size_t d = 0; d < cfg.delta_grid.size(); ++d) {
      SelectionRow row;
      row.rule = specs[r].label();
      row.delta = cfg.delta_grid[d];
      row.correct = correct[r][d];
      row.replicates = cfg.replicates;
      row.prob = static_cast<double>(correct[r][d]) / static_cast<double>(cfg.replicates);
      row.wilson = wilson_interval(correct[r][d], cfg.replicates);
      curve.rows.push_back(std::move(row));
    }
  return curve;
}

double matern_cov(double h, double kappa, double sigma, double nu) {
  if (!(kappa > 0.0) || !(sigma > 0.0) || !(nu > 0.0))
    throw ConfigError("matern: kappa, sigma and nu must be positive");
  const double x = kappa * std::abs(h);
  if (x < 1e-10) return sigma * sigma;
  const double norm = std::pow(2.0, nu - 1.0) * std::tgamma(nu);
  return sigma * sigma / norm * std::pow(x, nu) * bessel_k(nu, x);
}

std::vector<Gaussian> loo_kriging(const std::vector<std::array<double, 2>>& locations,
                                  const std::vector<double>& values, const MaternParams& params) {
  const std::size_t n = locations.size();
  if (values.size() != n) throw DimensionMismatch("loo_kriging: locations vs values");
  if (n < 2) throw ConfigError("loo_kriging needs at least two locations");
  SymMatrix cov(n);
  const double marginal = matern_cov(0.0, params.kappa, params.sigma, params.nu);
  for (std::size_t i = 0; i < n; ++i) {
    cov.set(i, i, marginal);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = locations[i][0] - locations[j][0];
      const double dy = locations[i][1] - locations[j][1];
      cov.set(i, j, matern_cov(std::hypot(dx, dy), params.kappa, params.sigma, params.nu));
    }
  }
  const LowerTriangular l = cholesky_jittered(cov);
  const SymMatrix q = chol_inverse(l);
  const std::vector<double> qy = matvec(q, values);
  std::vector<Gaussian> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double qii = q(i, i);
    if (!(qii > 0.0))
      throw NotPositiveDefinite("loo_kriging: nonpositive precision diagonal", i);
    out.push_back(Gaussian{values[i] - qy[i] / qii, std::sqrt(1.0 / qii)});
  }
  return out;
}

SelectionCurve run_spatial(const SpatialConfig& cfg) {
  if (cfg.n_locations < 2 || cfg.replicates == 0) throw ConfigError("spatial: empty design");
  if (cfg.delta_grid.empty()) throw ConfigError("spatial: empty delta grid");
  for (double d : cfg.delta_grid)
    if (!(d > 0.0) || d >= cfg.params.kappa)
      throw ConfigError("spatial: kappa offsets must lie in (0, kappa)");
  if (cfg.outlier) {
    if (cfg.outlier->count == 0 || cfg.outlier->count > cfg.n_locations)
      throw ConfigError("spatial: outlier count out of range");
    if (!(cfg.outlier->noise_sd > 0.0)) throw ConfigError("spatial: outlier noise sd must be > 0");
  }
  const auto specs = parse_rules(cfg.rules);

  std::vector<double> kappas{cfg.params.kappa};
  for (double d : cfg.delta_grid) {
    kappas.push_back(cfg.params.kappa + d);
    kappas.push_back(cfg.params.kappa - d);
  }

  std::vector<std::vector<std::size_t>> correct(
      specs.size(), std::vector<std::size_t>(cfg.delta_grid.size(), 0));
  const std::size_t n = cfg.n_locations;

  for (std::size_t rep = 0; rep < cfg.replicates; ++rep) try {
      RngStream rep_rng(cfg.seed, rep);
      auto loc_rng = rep_rng.substream(1);
    auto field_rng = rep_rng.substream(2);
    auto noise_rng = rep_rng.substream(3);

    std::vector<std::array<double, 2>> locations(n);
    for (auto& p : locations) {
      p[0] = loc_rng.uniform();
      p[1] = loc_rng.uniform();
    }

    SymMatrix cov(n);
    const double marginal = matern_cov(0.0, cfg.params.kappa, cfg.params.sigma, cfg.params.nu);
    for (std::size_t i = 0; i < n; ++i) {
      cov.set(i, i, marginal);
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = locations[i][0] - locations[j][0];
        const double dy = locations[i][1] - locations[j][1];
        cov.set(i, j,
                matern_cov(std::hypot(dx, dy), cfg.params.kappa, cfg.params.sigma, cfg.params.nu));
      }
    }
    const LowerTriangular l = cholesky_jittered(cov);
    std::vector<double> z(n);
    for (auto& zi : z) zi = field_rng.normal();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += l(i, j) * z[j];
      y[i] = acc;
    }
    if (cfg.outlier)
      for (std::size_t k = 0; k < cfg.outlier->count; ++k) {
        const auto idx = std::min<std::size_t>(
            n - 1, static_cast<std::size_t>(noise_rng.uniform() * static_cast<double>(n)));
        y[idx] += cfg.outlier->noise_sd * noise_rng.normal();
      }

    // Mean score per candidate kappa and rule; the data stay fixed.
    std::vector<std::vector<double>> mean_score(specs.size(),
                                                std::vector<double>(kappas.size(), 0.0));
    for (std::size_t m = 0; m < kappas.size(); ++m) {
      MaternParams p = cfg.params;
      p.kappa = kappas[m];
      const auto preds = loo_kriging(locations, y, p);
      for (std::size_t i = 0; i < n; ++i) {
        const Distribution fc{preds[i]};
        for (std::size_t r = 0; r < specs.size(); ++r)
          mean_score[r][m] += score(specs[r], fc, y[i]).value;
      }
    }
    for (std::size_t r = 0; r < specs.size(); ++r)
      for (std::size_t d = 0; d < cfg.delta_grid.size(); ++d) {
        const double truth = mean_score[r][0];
        if (truth > mean_score[r][1 + 2 * d] && truth > mean_score[r][2 + 2 * d])
          ++correct[r][d];
      }
  } catch (const Error& e) {
    rethrow_with_context(e, "replicate " + std::to_string(rep));
  }

  SelectionCurve curve;
  for (std::size_t r = 0; r < specs.size(); ++r)
    for (std::size_t d = 0; d < cfg.delta_grid.size(); ++d) {
      SelectionRow row;
      row.rule = specs[r].label();
      row.delta = cfg.delta_grid[d];
      row.correct = correct[r][d];
      row.replicates = cfg.replicates;
      row.prob = static_cast<double>(correct[r][d]) / static_cast<double>(cfg.replicates);
      row.wilson = wilson_interval(correct[r][d], cfg.replicates);
      curve.rows.push_back(std::move(row));
    }
  return curve;
}

NegBinFit fit_negbin(const std::vector<std::vector<double>>& x_rows,
                     const std::vector<double>& y) {
  const std::size_t n = x_rows.size();
  if (n == 0 || y.size() != n) throw DimensionMismatch("fit_negbin: design vs response");
  const std::size_t k = x_rows.front().size();
  if (k == 0 || k >= n) throw ConfigError("fit_negbin: need 0 < covariates < observations");
  for (const auto& row : x_rows)
    if (row.size() != k) throw DimensionMismatch("fit_negbin: ragged design matrix");
  for (double yi : y)
    if (!detail::is_nonneg_integer(yi)) throw SupportError("fit_negbin: counts must be >= 0");

  std::vector<double> theta(k, 0.0);
  std::vector<double> eta(n, 0.0);
  double s = 1.0;

  const auto refresh_eta = [&]() {
    for (std::size_t i = 0; i < n; ++i) eta[i] = clamp_eta(dot(x_rows[i], theta));
  };
  refresh_eta();

  const auto fisher_pass = [&]() {
    for (std::size_t inner = 0; inner < 50; ++inner) {
      std::vector<double> grad(k, 0.0);
      SymMatrix h(k);
      for (std::size_t i = 0; i < n; ++i) {
        const double mu = std::exp(eta[i]);
        const double g = s * (y[i] - mu) / (s + mu);
        const double w = s * mu / (s + mu);
        for (std::size_t a = 0; a < k; ++a) {
          grad[a] += g * x_rows[i][a];
          for (std::size_t b = a; b < k; ++b)
            h.set(a, b, h(a, b) + w * x_rows[i][a] * x_rows[i][b]);
        }
      }
      const auto step = chol_solve(cholesky_jittered(h), grad);
      double step_max = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        theta[a] = std::clamp(theta[a] + step[a], -kEtaClamp, kEtaClamp);
        step_max = std::max(step_max, std::abs(step[a]));
      }
      refresh_eta();
      if (step_max < 1e-10) break;
    }
  };

  double ll_prev = -std::numeric_limits<double>::infinity();
  std::size_t outer = 0;
  for (; outer < 200; ++outer) {
    fisher_pass();
    const double log_s =
        golden_max(std::log(1e-3), std::log(1e8), 1e-10,
                   [&](double u) { return negbin_loglik(eta, y, std::exp(u)); });
    s = std::exp(log_s);
    const double ll = negbin_loglik(eta, y, s);
    if (std::abs(ll - ll_prev) < 1e-8) {
      ll_prev = ll;
      ++outer;
      break;
    }
    ll_prev = ll;
  }
  if (outer >= 200)
    throw NonConvergence("fit_negbin: no convergence after 200 outer iterations");

  NegBinFit fit;
  fit.theta = theta;
  fit.s = s;
  fit.loglik = ll_prev;
  fit.iterations = outer;
  SymMatrix h(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = std::exp(eta[i]);
    const double w = s * mu / (s + mu);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b) h.set(a, b, h(a, b) + w * x_rows[i][a] * x_rows[i][b]);
  }
  const SymMatrix hinv = chol_inverse(cholesky_jittered(h));
  fit.theta_se.resize(k);
  for (std::size_t a = 0; a < k; ++a) fit.theta_se[a] = std::sqrt(hinv(a, a));
  return fit;
}

NbRegResult run_nbreg(const NbRegConfig& cfg) {
  if (cfg.theta.size() != cfg.k_covariates)
    throw ConfigError("nbreg: theta length must match k_covariates");
  if (cfg.n_obs <= cfg.k_covariates) throw ConfigError("nbreg: need more observations than covariates");
  if (!(cfg.s > 0.0)) throw ConfigError("nbreg: s must be > 0");

  RngStream root(cfg.seed);
  auto cov_rng = root.substream(1);
  auto obs_rng = root.substream(2);

  std::vector<std::vector<double>> x(cfg.n_obs, std::vector<double>(cfg.k_covariates));
  std::vector<double> y(cfg.n_obs);
  for (std::size_t i = 0; i < cfg.n_obs; ++i)
    for (std::size_t j = 0; j < cfg.k_covariates; ++j) x[i][j] = cov_rng.normal();
  for (std::size_t i = 0; i < cfg.n_obs; ++i) {
    const double mu = std::exp(clamp_eta(dot(x[i], cfg.theta)));
    y[i] = sample_one(Distribution{NegBin{mu, cfg.s}}, obs_rng);
  }

  NbRegResult res;
  res.fit = fit_negbin(x, y);

  const RuleSpec crps_spec = RuleSpec::parse("crps");
  const RuleSpec scrps_spec = RuleSpec::parse("scrps");
  res.per_obs.resize(cfg.n_obs);
  for (std::size_t i = 0; i < cfg.n_obs; ++i) {
    auto& o = res.per_obs[i];
    o.y = y[i];
    o.mu_hat = std::exp(clamp_eta(dot(x[i], res.fit.theta)));
    const Distribution pred{NegBin{o.mu_hat, res.fit.s}};
    o.crps = score(crps_spec, pred, y[i]).value;
    o.scrps = score(scrps_spec, pred, y[i]).value;
    o.raw_residual = std::abs(y[i] - o.mu_hat);
    o.scaled_residual = o.raw_residual / std::sqrt(o.mu_hat + o.mu_hat * o.mu_hat / res.fit.s);
  }

  // Cumulative mean score over observations ordered by predicted mean,
  // relative to the overall mean; flat curves mean size does not drive rank.
  std::vector<std::size_t> order(cfg.n_obs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return res.per_obs[a].mu_hat < res.per_obs[b].mu_hat; });
  double total_crps = 0.0, total_scrps = 0.0;
  for (const auto& o : res.per_obs) {
    total_crps += o.crps;
    total_scrps += o.scrps;
  }
  const double nn = static_cast<double>(cfg.n_obs);
  double run_crps = 0.0, run_scrps = 0.0;
  res.topk.resize(cfg.n_obs);
  for (std::size_t ki = 0; ki < cfg.n_obs; ++ki) {
    run_crps += res.per_obs[order[ki]].crps;
    run_scrps += res.per_obs[order[ki]].scrps;
    const double kk = static_cast<double>(ki + 1);
    res.topk[ki] = {ki + 1, (run_crps / kk) / (total_crps / nn),
                    (run_scrps / kk) / (total_scrps / nn)};
  }

  std::vector<double> abs_crps(cfg.n_obs), abs_scrps(cfg.n_obs), raw(cfg.n_obs), scaled(cfg.n_obs);
  for (std::size_t i = 0; i < cfg.n_obs; ++i) {
    abs_crps[i] = std::abs(res.per_obs[i].crps);
    abs_scrps[i] = std::abs(res.per_obs[i].scrps);
    raw[i] = res.per_obs[i].raw_residual;
    scaled[i] = res.per_obs[i].scaled_residual;
  }
  res.rho_crps_raw = spearman(abs_crps, raw);
  res.rho_crps_scaled = spearman(abs_crps, scaled);
  res.rho_scrps_raw = spearman(abs_scrps, raw);
  res.rho_scrps_scaled = spearman(abs_scrps, scaled);
  return res;
}

SurfaceResult figure1_surfaces(const SurfaceConfig& cfg) {
  if (cfg.grid_n < 2) throw ConfigError("surface: grid_n must be >= 2");
  if (!(cfg.sigma1 > 0.0) || !(cfg.sigma2 > 0.0)) throw ConfigError("surface: sigmas must be > 0");
  if (!(cfg.ratio_lo > 0.0) || !(cfg.ratio_hi > cfg.ratio_lo))
    throw ConfigError("surface: bad ratio range");
  if (!(cfg.p_lo > 0.0) || !(cfg.p_hi < 1.0) || !(cfg.p_hi > cfg.p_lo))
    throw ConfigError("surface: p range must sit inside (0, 1)");
  const auto specs = parse_rules(cfg.rules);

  SurfaceResult res;
  res.ratio_grid.resize(cfg.grid_n);
  res.p_grid.resize(cfg.grid_n);
  const double lr0 = std::log(cfg.ratio_lo), lr1 = std::log(cfg.ratio_hi);
  for (std::size_t i = 0; i < cfg.grid_n; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(cfg.grid_n - 1);
    res.ratio_grid[i] = std::exp(lr0 + f * (lr1 - lr0));
    res.p_grid[i] = cfg.p_lo + f * (cfg.p_hi - cfg.p_lo);
  }

  for (const auto& spec : specs) {
    const Gaussian truth1{0.0, cfg.sigma1};
    const Gaussian truth2{0.0, cfg.sigma2};
    std::vector<double> ax1(cfg.grid_n), ax2(cfg.grid_n), mx1(cfg.grid_n), mx2(cfg.grid_n);
    for (std::size_t i = 0; i < cfg.grid_n; ++i) {
      const double r = res.ratio_grid[i];
      ax1[i] = expected_gaussian_score(spec, Gaussian{0.0, r * cfg.sigma1}, truth1);
      ax2[i] = expected_gaussian_score(spec, Gaussian{0.0, r * cfg.sigma2}, truth2);
      const double q = normal_quantile(res.p_grid[i]);
      mx1[i] = expected_gaussian_score(spec, Gaussian{cfg.sigma1 * q, cfg.sigma1}, truth1);
      mx2[i] = expected_gaussian_score(spec, Gaussian{cfg.sigma2 * q, cfg.sigma2}, truth2);
    }
    std::vector<std::vector<double>> sig(cfg.grid_n, std::vector<double>(cfg.grid_n));
    std::vector<std::vector<double>> mu(cfg.grid_n, std::vector<double>(cfg.grid_n));
    for (std::size_t i = 0; i < cfg.grid_n; ++i)
      for (std::size_t j = 0; j < cfg.grid_n; ++j) {
        sig[i][j] = 0.5 * ax1[i] + 0.5 * ax2[j];
        mu[i][j] = 0.5 * mx1[i] + 0.5 * mx2[j];
      }
    res.sigma_surface[spec.label()] = std::move(sig);
    res.mu_surface[spec.label()] = std::move(mu);
  }
  return res;
}

EntropyTraceResult entropy_decomposition_trace(const EntropyTraceConfig& cfg) {
  if (!(std::abs(cfg.a) < 1.0)) throw ConfigError("entropy trace: |a| must be < 1");
  if (cfg.sigma_x < 0.0 || !(cfg.sigma_y > 0.0) || cfg.series_len == 0)
    throw ConfigError("entropy trace: bad configuration");
  const RuleSpec crps_spec = RuleSpec::parse("crps");
  const RuleSpec scrps_spec = RuleSpec::parse("scrps");
  const RuleSpec logs_spec = RuleSpec::parse("logs");

  RngStream rng(cfg.seed);
  const double sd0 = cfg.sigma_x / std::sqrt(1.0 - cfg.a * cfg.a);
  double x = sd0 * rng.normal();

  EntropyTraceResult res;
  res.rows.resize(cfg.series_len);
  for (auto& row : res.rows) {
    x = cfg.a * x + cfg.sigma_x * rng.normal();
    const double vol = std::exp(x);
    const double y = cfg.sigma_y * vol * rng.normal();
    const Distribution fc{Gaussian{0.0, cfg.sigma_y * vol}};
    row.x = x;
    row.y = y;
    row.crps = score(crps_spec, fc, y).value;
    row.crps_entropy = score_entropy(crps_spec, fc).value;
    row.crps_residual = row.crps - row.crps_entropy;
    row.scrps = score(scrps_spec, fc, y).value;
    row.scrps_entropy = score_entropy(scrps_spec, fc).value;
    row.scrps_residual = row.scrps - row.scrps_entropy;
    row.logs = score(logs_spec, fc, y).value;
    row.logs_entropy = score_entropy(logs_spec, fc).value;
    row.logs_residual = row.logs - row.logs_entropy;
  }
  return res;
}

}  // namespace scoring

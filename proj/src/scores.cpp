#include "scoring/scores.hpp"

#include <cmath>

#include "scoring/numerics.hpp"

namespace scoring {

double HFunction::operator()(double x) const {
  switch (tag) {
    case Tag::linear: return -0.5 * x;
    case Tag::log: return -0.5 * std::log(x);
    case Tag::sqrt: return -std::sqrt(x);
    case Tag::shifted_log: return -0.5 * std::log(x + gamma);
  }
  return 0.0;
}

double HFunction::deriv(double x) const {
  switch (tag) {
    case Tag::linear: return -0.5;
    case Tag::log: return -0.5 / x;
    case Tag::sqrt: return -0.5 / std::sqrt(x);
    case Tag::shifted_log: return -0.5 / (x + gamma);
  }
  return 0.0;
}

HFunction::Tag h_tag_from_name(const std::string& name) {
  if (name == "linear") return HFunction::Tag::linear;
  if (name == "log") return HFunction::Tag::log;
  if (name == "sqrt") return HFunction::Tag::sqrt;
  if (name == "shifted_log") return HFunction::Tag::shifted_log;
  throw ConfigError("unknown h function: " + name);
}

const char* h_tag_name(HFunction::Tag t) {
  switch (t) {
    case HFunction::Tag::linear: return "linear";
    case HFunction::Tag::log: return "log";
    case HFunction::Tag::sqrt: return "sqrt";
    case HFunction::Tag::shifted_log: return "shifted_log";
  }
  return "?";
}

Rule rule_from_name(const std::string& name) {
  if (name == "crps") return Rule::crps;
  if (name == "scrps") return Rule::scrps;
  if (name == "logs") return Rule::logs;
  if (name == "dss") return Rule::dss;
  if (name == "rcrps") return Rule::rcrps;
  if (name == "rscrps") return Rule::rscrps;
  if (name == "kernel") return Rule::kernel;
  if (name == "genkernel") return Rule::genkernel;
  throw ConfigError("unknown rule: " + name);
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::crps: return "crps";
    case Rule::scrps: return "scrps";
    case Rule::logs: return "logs";
    case Rule::dss: return "dss";
    case Rule::rcrps: return "rcrps";
    case Rule::rscrps: return "rscrps";
    case Rule::kernel: return "kernel";
    case Rule::genkernel: return "genkernel";
  }
  return "?";
}

RuleSpec RuleSpec::parse(const std::string& token) {
  RuleSpec spec;
  std::size_t pos = token.find(':');
  spec.rule = rule_from_name(token.substr(0, pos));
  double alpha = 1.0;
  std::optional<double> trunc;
  while (pos != std::string::npos) {
    std::size_t next = token.find(':', pos + 1);
    std::string opt = token.substr(pos + 1, next == std::string::npos ? next : next - pos - 1);
    std::size_t eq = opt.find('=');
    if (eq == std::string::npos) throw ConfigError("rule option needs key=value: " + opt);
    std::string key = opt.substr(0, eq);
    std::string val = opt.substr(eq + 1);
    try {
      if (key == "c") {
        if (spec.rule == Rule::kernel || spec.rule == Rule::genkernel) trunc = std::stod(val);
        else spec.c = std::stod(val);
      } else if (key == "alpha") {
        alpha = std::stod(val);
      } else if (key == "h") {
        spec.h.tag = h_tag_from_name(val);
      } else if (key == "gamma") {
        spec.h.gamma = std::stod(val);
      } else {
        throw ConfigError("unknown rule option: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad numeric value in rule option: " + opt);
    }
    pos = next;
  }
  if (spec.rule == Rule::rcrps || spec.rule == Rule::rscrps) {
    if (!(spec.c > 0.0)) throw ConfigError("rcrps/rscrps need c > 0");
  }
  if (spec.rule == Rule::kernel || spec.rule == Rule::genkernel) {
    spec.kernel_spec = KernelSpec(alpha, trunc);
  }
  return spec;
}

std::string RuleSpec::label() const {
  std::string s = rule_name(rule);
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };
  if (rule == Rule::rcrps || rule == Rule::rscrps) s += "_c" + num(c);
  if (rule == Rule::kernel || rule == Rule::genkernel) {
    s += "_a" + num(kernel_spec.alpha);
    if (kernel_spec.trunc) s += "_c" + num(*kernel_spec.trunc);
  }
  if (rule == Rule::genkernel) {
    s += std::string("_h") + h_tag_name(h.tag);
    if (h.tag == HFunction::Tag::shifted_log) s += num(h.gamma);
  }
  return s;
}

ScoreValue log_score(const Distribution& d, double y) {
  if (std::holds_alternative<Ensemble>(d))
    throw UnsupportedDistribution("log_score: ensembles carry no density");
  return {log_pdf(d, y), Method::analytic, 0.0};
}

ScoreValue dss_score(const Distribution& d, double y) {
  double v = variance(d);
  if (!(v > 0.0))
    throw DegenerateDistribution("dss: predictive variance must be positive");
  double m = mean(d);
  return {-(y - m) * (y - m) / (2.0 * v) - 0.5 * std::log(v), Method::analytic, 0.0};
}

namespace {

ScoreValue from_expectations(const HFunction& h, const KernelExpectations& e) {
  if (h.needs_positive_spread() && !(e.e_pp > 0.0))
    throw DegenerateDistribution(
        "generalized kernel score: zero kernel spread with a log/sqrt h; "
        "use h=shifted_log for degenerate forecasts");
  double hp = h.deriv(e.e_pp);
  double value = h(e.e_pp) + 2.0 * hp * (e.e_py - e.e_pp);
  // First-order error propagation; the e_pp dependence enters through both
  // terms but h() + 2h'()(..) is stationary in e_pp at e_py = e_pp, so the
  // dominant term is the e_py one away from calibration either way.
  double se = std::sqrt(4.0 * hp * hp * (e.se_py * e.se_py + e.se_pp * e.se_pp));
  return {value, e.method, se};
}

}  // namespace

ScoreValue kernel_score(const KernelSpec& k, const Distribution& d, double y,
                        const ScoreEnv& env) {
  KernelExpectations e = expectations(k, d, y, env.budget, RngStream(env.seed));
  double se = std::sqrt(0.25 * e.se_pp * e.se_pp + e.se_py * e.se_py);
  return {0.5 * e.e_pp - e.e_py, e.method, se};
}

ScoreValue generalized_kernel_score(const HFunction& h, const KernelSpec& k,
                                    const Distribution& d, double y, const ScoreEnv& env) {
  KernelExpectations e = expectations(k, d, y, env.budget, RngStream(env.seed));
  return from_expectations(h, e);
}

ScoreValue scrps(const Distribution& d, double y, const ScoreEnv& env) {
  KernelSpec k(1.0);
  KernelExpectations e = expectations(k, d, y, env.budget, RngStream(env.seed));
  if (!(e.e_pp > 0.0))
    throw DegenerateDistribution("scrps: zero kernel spread (point-mass forecast)");
  double value = -e.e_py / e.e_pp - 0.5 * std::log(e.e_pp);
  double dpp = e.e_py / (e.e_pp * e.e_pp) - 0.5 / e.e_pp;
  double se = std::sqrt(e.se_py * e.se_py / (e.e_pp * e.e_pp) + dpp * dpp * e.se_pp * e.se_pp);
  return {value, e.method, se};
}

RobustScores robust_scores(double c, const Distribution& d, double y, const ScoreEnv& env) {
  if (!(c > 0.0)) throw std::domain_error("robust_scores: c must be positive");
  KernelSpec k(1.0, c);
  KernelExpectations e = expectations(k, d, y, env.budget, RngStream(env.seed));
  RobustScores out;
  out.rcrps = {0.5 * e.e_pp - e.e_py, e.method,
               std::sqrt(0.25 * e.se_pp * e.se_pp + e.se_py * e.se_py)};
  if (!(e.e_pp > 0.0))
    throw DegenerateDistribution("rscrps: zero truncated kernel spread");
  out.rscrps = {-e.e_py / e.e_pp - 0.5 * std::log(e.e_pp), e.method,
                std::sqrt(e.se_py * e.se_py / (e.e_pp * e.e_pp))};
  return out;
}

ScoreValue score(const RuleSpec& spec, const Distribution& d, double y, const ScoreEnv& env) {
  switch (spec.rule) {
    case Rule::crps: return kernel_score(KernelSpec(1.0), d, y, env);
    case Rule::scrps: return scrps(d, y, env);
    case Rule::logs: return log_score(d, y);
    case Rule::dss: return dss_score(d, y);
    case Rule::rcrps: return robust_scores(spec.c, d, y, env).rcrps;
    case Rule::rscrps: return robust_scores(spec.c, d, y, env).rscrps;
    case Rule::kernel: return kernel_score(spec.kernel_spec, d, y, env);
    case Rule::genkernel: return generalized_kernel_score(spec.h, spec.kernel_spec, d, y, env);
  }
  throw ConfigError("score: unhandled rule");
}

namespace {

// E_{Y~P} log f_P(Y), the (negative) differential entropy, for the
// distributions with a closed form; NegBin by exact sum.
double expected_log_density(const Distribution& d) {
  if (const auto* g = std::get_if<Gaussian>(&d))
    return -0.5 * std::log(2.0 * kPi * g->sigma * g->sigma) - 0.5;
  if (const auto* l = std::get_if<Laplace>(&d)) return -1.0 - std::log(2.0 * l->b);
  if (const auto* nb = std::get_if<NegBin>(&d)) {
    long long cut = detail::negbin_support_cut(*nb);
    double s = 0.0;
    for (long long k = 0; k <= cut; ++k) {
      double p = negbin_pmf(*nb, k);
      if (p > 0.0) s += p * std::log(p);
    }
    return s;
  }
  if (const auto* ls = std::get_if<LocationScale>(&d))
    return expected_log_density(*ls->base) - std::log(ls->sigma);
  throw UnsupportedDistribution("log-score entropy undefined for this distribution");
}

}  // namespace

ScoreValue score_entropy(const RuleSpec& spec, const Distribution& d, const ScoreEnv& env) {
  auto pair_spread = [&](const KernelSpec& k) {
    return expectations(k, d, mean(d), env.budget, RngStream(env.seed));
  };
  switch (spec.rule) {
    case Rule::crps: {
      auto e = pair_spread(KernelSpec(1.0));
      return {-0.5 * e.e_pp, e.method, 0.5 * e.se_pp};
    }
    case Rule::scrps: {
      auto e = pair_spread(KernelSpec(1.0));
      if (!(e.e_pp > 0.0)) throw DegenerateDistribution("scrps entropy: zero kernel spread");
      return {-1.0 - 0.5 * std::log(e.e_pp), e.method, 0.5 * e.se_pp / e.e_pp};
    }
    case Rule::logs: return {expected_log_density(d), Method::analytic, 0.0};
    case Rule::dss: {
      double v = variance(d);
      if (!(v > 0.0)) throw DegenerateDistribution("dss entropy: zero variance");
      return {-0.5 - 0.5 * std::log(v), Method::analytic, 0.0};
    }
    case Rule::rcrps: {
      auto e = pair_spread(KernelSpec(1.0, spec.c));
      return {-0.5 * e.e_pp, e.method, 0.5 * e.se_pp};
    }
    case Rule::rscrps: {
      auto e = pair_spread(KernelSpec(1.0, spec.c));
      if (!(e.e_pp > 0.0)) throw DegenerateDistribution("rscrps entropy: zero kernel spread");
      return {-1.0 - 0.5 * std::log(e.e_pp), e.method, 0.5 * e.se_pp / e.e_pp};
    }
    case Rule::kernel: {
      auto e = pair_spread(spec.kernel_spec);
      return {-0.5 * e.e_pp, e.method, 0.5 * e.se_pp};
    }
    case Rule::genkernel: {
      auto e = pair_spread(spec.kernel_spec);
      if (spec.h.needs_positive_spread() && !(e.e_pp > 0.0))
        throw DegenerateDistribution("genkernel entropy: zero kernel spread with log/sqrt h");
      return {spec.h(e.e_pp), e.method, std::abs(spec.h.deriv(e.e_pp)) * e.se_pp};
    }
  }
  throw ConfigError("score_entropy: unhandled rule");
}

ScoreValue transform_score(const RuleSpec& base, const Distribution& d, double y,
                           const ScoreEnv& env) {
  ScoreValue s = score(base, d, y, env);
  ScoreValue h = score_entropy(base, d, env);
  if (!(s.value < 0.0) || !(h.value < 0.0))
    throw SignError("transform_score: base score must be strictly negative, got S(P,y)=" +
                    std::to_string(s.value) + ", S(P,P)=" + std::to_string(h.value));
  double a = std::abs(h.value);
  double value = s.value / a - std::log(a);
  return {value, s.method, s.mc_se / a};
}

double expected_gaussian_score(const RuleSpec& spec, const Gaussian& forecast,
                               const Gaussian& truth) {
  double mu_d = truth.mu - forecast.mu;
  double sig_f = forecast.sigma;
  double sig_d = std::sqrt(sig_f * sig_f + truth.sigma * truth.sigma);
  switch (spec.rule) {
    case Rule::crps:
      return sig_f / kSqrtPi - 2.0 * sig_d * std_normal_pdf(mu_d / sig_d) +
             mu_d * (1.0 - 2.0 * std_normal_cdf(mu_d / sig_d));
    case Rule::scrps:
      return -(kSqrtPi / sig_f) * (sig_d * std_normal_pdf(mu_d / sig_d) - mu_d / 2.0 +
                                   mu_d * std_normal_cdf(mu_d / sig_d)) -
             0.5 * std::log(2.0 * sig_f / kSqrtPi);
    case Rule::rcrps:
      return 0.5 * e_function(0.0, kSqrt2 * sig_f, spec.c) - e_function(mu_d, sig_d, spec.c);
    case Rule::rscrps: {
      double epp = e_function(0.0, kSqrt2 * sig_f, spec.c);
      return -e_function(mu_d, sig_d, spec.c) / epp - 0.5 * std::log(epp);
    }
    case Rule::logs:
      return -0.5 * std::log(2.0 * kPi * sig_f * sig_f) -
             (truth.sigma * truth.sigma + mu_d * mu_d) / (2.0 * sig_f * sig_f);
    case Rule::dss:
      return -(truth.sigma * truth.sigma + mu_d * mu_d) / (2.0 * sig_f * sig_f) -
             0.5 * std::log(sig_f * sig_f);
    default:
      throw UnsupportedDistribution(
          "expected_gaussian_score: closed form available for crps, scrps, rcrps, rscrps, "
          "logs, dss only");
  }
}

ScoreEnv observation_env(const ScoreEnv& env, std::size_t i) {
  ScoreEnv obs_env = env;
  obs_env.seed = RngStream(env.seed).substream(i).key();
  return obs_env;
}

ScoreReport average_score(const RuleSpec& spec, const std::vector<Observation>& data,
                          const ScoreEnv& env) {
  ScoreReport report;
  report.rule_label = spec.label();
  report.per_obs.reserve(data.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ScoreEnv obs_env = observation_env(env, i);
    try {
      ScoreValue s = score(spec, data[i].dist, data[i].y, obs_env);
      ScoreValue h = score_entropy(spec, data[i].dist, obs_env);
      report.per_obs.push_back({s.value, h.value, s.value - h.value, s.method});
      sum += s.value;
    } catch (const Error& err) {
      rethrow_with_context(err, "observation " + std::to_string(i));
    }
  }
  report.average = data.empty() ? 0.0 : sum / static_cast<double>(data.size());
  return report;
}

}  // namespace scoring

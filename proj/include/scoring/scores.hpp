#pragma once

#include <string>
#include <vector>

#include "scoring/kernels.hpp"

namespace scoring {

// Convex decreasing h applied to the kernel spread, implementing
//   S(P, y) = h(e_pp) + 2 h'(e_pp) (e_py - e_pp).
// linear recovers the kernel score, log the standardized (scale-invariant)
// one; shifted_log keeps degenerate forecasts finite.
struct HFunction {
  enum class Tag { linear, log, sqrt, shifted_log };
  Tag tag = Tag::log;
  double gamma = 0.1;  // shift for shifted_log

  double operator()(double x) const;
  double deriv(double x) const;
  // log and sqrt need e_pp > 0; linear and shifted_log accept 0.
  bool needs_positive_spread() const { return tag == Tag::log || tag == Tag::sqrt; }
};

HFunction::Tag h_tag_from_name(const std::string& name);
const char* h_tag_name(HFunction::Tag t);

enum class Rule { crps, scrps, logs, dss, rcrps, rscrps, kernel, genkernel };

Rule rule_from_name(const std::string& name);
const char* rule_name(Rule r);

// A scoring rule plus the parameters it needs. c applies to rcrps/rscrps,
// kernel_spec to kernel/genkernel, h to genkernel only.
struct RuleSpec {
  Rule rule = Rule::crps;
  double c = 2.0;
  KernelSpec kernel_spec{1.0};
  HFunction h{};

  static RuleSpec parse(const std::string& token);  // e.g. "rcrps:c=2"
  std::string label() const;                        // stable identifier for output files
};

struct ScoreValue {
  double value = 0.0;
  Method method = Method::analytic;
  double mc_se = 0.0;
};

// Monte-Carlo budget and root seed for the paths that need sampling.
// Observation-level streams are derived from the seed by index.
struct ScoreEnv {
  MCBudget budget{};
  std::uint64_t seed = 0x5eedf00dULL;
};

ScoreValue log_score(const Distribution& d, double y);
ScoreValue dss_score(const Distribution& d, double y);
ScoreValue kernel_score(const KernelSpec& k, const Distribution& d, double y,
                        const ScoreEnv& env = {});
ScoreValue generalized_kernel_score(const HFunction& h, const KernelSpec& k,
                                    const Distribution& d, double y, const ScoreEnv& env = {});
ScoreValue scrps(const Distribution& d, double y, const ScoreEnv& env = {});

struct RobustScores {
  ScoreValue rcrps;
  ScoreValue rscrps;
};
RobustScores robust_scores(double c, const Distribution& d, double y, const ScoreEnv& env = {});

// S(P,y)/|S(P,P)| - log |S(P,P)| for a negative-valued proper base score.
ScoreValue transform_score(const RuleSpec& base, const Distribution& d, double y,
                           const ScoreEnv& env = {});

ScoreValue score(const RuleSpec& spec, const Distribution& d, double y, const ScoreEnv& env = {});

// Generalized entropy H(P) = S(P, P).
ScoreValue score_entropy(const RuleSpec& spec, const Distribution& d, const ScoreEnv& env = {});

// Expected score of forecast N(mu_f, sigma_f^2) under truth N(mu_t, sigma_t^2),
// closed form. Supports crps, scrps, rcrps, rscrps, logs, dss.
double expected_gaussian_score(const RuleSpec& spec, const Gaussian& forecast,
                               const Gaussian& truth);

struct Observation {
  Distribution dist;
  double y;
};

struct ScoreReport {
  struct Row {
    double score;
    double entropy;
    double residual;  // score - entropy
    Method method;
  };
  std::vector<Row> per_obs;
  double average = 0.0;
  std::string rule_label;
};

// Environment used for observation i inside average_score; exposed so callers
// can reproduce or re-probe a single observation with identical draws.
ScoreEnv observation_env(const ScoreEnv& env, std::size_t i);

ScoreReport average_score(const RuleSpec& spec, const std::vector<Observation>& data,
                          const ScoreEnv& env = {});

}  // namespace scoring

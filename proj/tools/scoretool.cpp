#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scoring/diagnostics.hpp"
#include "scoring/io.hpp"
#include "scoring/numerics.hpp"

namespace fs = std::filesystem;

namespace {

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double_flag(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw scoring::ConfigError(what + ": not a number: '" + s + "'");
  }
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split_list(s, ',')) out.push_back(parse_double_flag(tok, what));
  if (out.empty()) throw scoring::ConfigError(what + ": empty list");
  return out;
}

scoring::Distribution parse_dist_flag(const std::string& token) {
  const auto colon = token.find(':');
  if (colon == std::string::npos)
    throw scoring::ConfigError("--dist expects kind:params, e.g. gaussian:0,1");
  const std::string kind = token.substr(0, colon);
  const std::string params = token.substr(colon + 1);
  if (kind == "ensemble") {
    std::vector<double> members;
    for (const auto& tok : split_list(params, '|'))
      members.push_back(parse_double_flag(tok, "--dist"));
    return scoring::Distribution{scoring::Ensemble{std::move(members)}};
  }
  const auto parts = parse_double_list(params, "--dist");
  if (parts.size() != 2) throw scoring::ConfigError("--dist " + kind + " takes two parameters");
  if (kind == "gaussian") return scoring::Distribution{scoring::Gaussian{parts[0], parts[1]}};
  if (kind == "laplace") return scoring::Distribution{scoring::Laplace{parts[0], parts[1]}};
  if (kind == "negbin") return scoring::Distribution{scoring::NegBin{parts[0], parts[1]}};
  throw scoring::ConfigError("--dist: unknown kind '" + kind + "'");
}

scoring::RuleSpec parse_rule_with_c(const std::string& token, bool has_c, double c) {
  scoring::RuleSpec spec = scoring::RuleSpec::parse(token);
  if (has_c) {
    if (spec.rule == scoring::Rule::kernel || spec.rule == scoring::Rule::genkernel)
      spec.kernel_spec = scoring::KernelSpec(spec.kernel_spec.alpha, c);
    else
      spec.c = c;
  }
  return spec;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw scoring::ConfigError("cannot open for writing: " + p.string());
  out << content;
  if (!out) throw scoring::ConfigError("write failed: " + p.string());
}

fs::path ensure_outdir(const std::string& dir) {
  fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec)
    throw scoring::ConfigError("cannot create output directory " + p.string() + ": " +
                               ec.message());
  return p;
}

// Re-scores one record at a time with the same per-observation streams to
// find which one made a rule fail, then rethrows with the record id attached.
void attribute_record_error(const scoring::RuleSpec& spec,
                            const std::vector<scoring::Record>& records,
                            const scoring::ScoreEnv& env) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto obs_env = scoring::observation_env(env, i);
    try {
      (void)scoring::score(spec, records[i].obs.dist, records[i].obs.y, obs_env);
      (void)scoring::score_entropy(spec, records[i].obs.dist, obs_env);
    } catch (const scoring::Error& e) {
      scoring::rethrow_with_context(e, "rule " + spec.label() + ", record " + records[i].id);
    }
  }
}

int run_score(const std::string& input, const std::string& rules_csv, const std::string& out_dir,
              const std::string& format, std::uint64_t seed, std::size_t mc_budget, bool negate) {
  const auto rule_tokens = split_list(rules_csv, ',');
  if (rule_tokens.empty()) {
    std::cerr << "score: --rules must name at least one rule\n";
    return 2;
  }
  std::vector<scoring::RuleSpec> specs;
  for (const auto& tok : rule_tokens) specs.push_back(scoring::RuleSpec::parse(tok));

  const auto records = scoring::read_observations_csv(input);
  if (records.empty()) {
    std::cerr << "score: no records in " << input << "\n";
    return 2;
  }
  scoring::ScoreEnv env;
  env.budget.n = mc_budget;
  env.seed = seed;

  std::vector<scoring::Observation> obs;
  obs.reserve(records.size());
  for (const auto& r : records) obs.push_back(r.obs);

  std::vector<scoring::ScoreReport> reports;
  for (const auto& spec : specs) {
    try {
      reports.push_back(scoring::average_score(spec, obs, env));
    } catch (const scoring::Error&) {
      attribute_record_error(spec, records, env);
      throw;
    }
  }

  const fs::path dir = ensure_outdir(out_dir);
  const double sign = negate ? -1.0 : 1.0;
  if (format == "json") {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& rep : reports)
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& row = rep.per_obs[i];
        rows.push_back(nlohmann::ordered_json{{"id", records[i].id},
                                              {"rule", rep.rule_label},
                                              {"score", sign * row.score},
                                              {"entropy", sign * row.entropy},
                                              {"residual", sign * row.residual},
                                              {"method", scoring::method_name(row.method)}});
      }
    write_file(dir / "scores.json", rows.dump(2) + "\n");
  } else {
    std::ostringstream csv;
    scoring::write_scores_csv(csv, records, reports, negate);
    write_file(dir / "scores.csv", csv.str());
  }
  scoring::ScoreRunMeta meta{input, seed, mc_budget, negate};
  write_file(dir / "summary.json", scoring::scores_summary_json(meta, records, reports));
  for (const auto& rep : reports)
    std::cout << rep.rule_label << " average " << scoring::fmt_g17(sign * rep.average) << " (n="
              << rep.per_obs.size() << ")\n";
  return 0;
}

int run_diag_scale(const std::string& rule, bool has_c, double c, const std::string& dist,
                   const std::string& sigmas_csv, const std::string& direction_csv,
                   const std::string& out_dir, const std::string& format, std::uint64_t seed,
                   std::size_t mc_budget) {
  const auto spec = parse_rule_with_c(rule, has_c, c);
  const auto base = parse_dist_flag(dist);
  const auto sigmas = parse_double_list(sigmas_csv, "--sigmas");
  const auto dir_vals = parse_double_list(direction_csv, "--direction");
  if (dir_vals.size() != 2) throw scoring::ConfigError("--direction takes two numbers: mu,sigma");
  scoring::ScoreEnv env;
  env.budget.n = mc_budget;
  env.seed = seed;

  const auto res = scoring::local_invariance_check(spec, base, {dir_vals[0], dir_vals[1]},
                                                   sigmas, env);

  const fs::path dir = ensure_outdir(out_dir);
  if (format == "json") {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < res.sigmas.size(); ++i)
      rows.push_back(nlohmann::ordered_json{
          {"sigma", res.sigmas[i]}, {"s_hat", res.s_hats[i]}, {"p_hat", res.p_hats[i]}});
    nlohmann::ordered_json j{{"rule", spec.label()},
                             {"rows", std::move(rows)},
                             {"spread", res.spread},
                             {"sigma_exponent", res.sigma_exponent}};
    write_file(dir / "scale.json", j.dump(2) + "\n");
  } else {
    std::ostringstream csv;
    csv << "sigma,s_hat,p_hat\n";
    for (std::size_t i = 0; i < res.sigmas.size(); ++i)
      csv << scoring::fmt_g17(res.sigmas[i]) << ',' << scoring::fmt_g17(res.s_hats[i]) << ','
          << scoring::fmt_g17(res.p_hats[i]) << '\n';
    write_file(dir / "scale.csv", csv.str());
  }
  std::cout << spec.label() << " scale function: spread " << short_num(res.spread)
            << ", sigma exponent " << short_num(res.sigma_exponent) << "\n";
  return 0;
}

int run_diag_sensitivity(const std::string& rule, bool has_c, double c, const std::string& dist,
                         const std::string& ys_csv, const std::string& out_dir,
                         const std::string& format, std::uint64_t seed, std::size_t mc_budget) {
  const auto spec = parse_rule_with_c(rule, has_c, c);
  const auto base = parse_dist_flag(dist);
  std::vector<double> ys;
  if (ys_csv.empty())
    for (int i = 0; i < 10; ++i) ys.push_back(std::pow(10.0, 2.0 + 3.0 * i / 9.0));
  else
    ys = parse_double_list(ys_csv, "--ys");
  scoring::ScoreEnv env;
  env.budget.n = mc_budget;
  env.seed = seed;

  const double alpha = scoring::estimate_sensitivity(spec, base, ys, env);

  const fs::path dir = ensure_outdir(out_dir);
  if (format == "json") {
    nlohmann::ordered_json j{{"rule", spec.label()}, {"alpha_hat", alpha}};
    write_file(dir / "sensitivity.json", j.dump(2) + "\n");
  } else {
    std::ostringstream csv;
    csv << "rule,alpha_hat\n" << spec.label() << ',' << scoring::fmt_g17(alpha) << '\n';
    write_file(dir / "sensitivity.csv", csv.str());
  }
  std::cout << spec.label() << " sensitivity exponent " << short_num(alpha) << "\n";
  return 0;
}

int run_diag_propriety(const std::string& rule, bool has_c, double c, double mu, double sigma,
                       std::size_t grid_n, const std::string& out_dir,
                       const std::string& format) {
  const auto spec = parse_rule_with_c(rule, has_c, c);
  const scoring::Gaussian truth{mu, sigma};
  std::vector<double> mu_grid, sigma_grid;
  scoring::make_sweep_grid(truth, grid_n, mu_grid, sigma_grid);
  const auto res = scoring::propriety_sweep(spec, truth, mu_grid, sigma_grid);

  const fs::path dir = ensure_outdir(out_dir);
  if (format == "json") {
    nlohmann::ordered_json j{{"rule", spec.label()},
                             {"truth_mu", mu},
                             {"truth_sigma", sigma},
                             {"best_mu", res.best_mu},
                             {"best_sigma", res.best_sigma},
                             {"best_value", res.best_value},
                             {"truth_is_argmax", res.truth_is_argmax}};
    write_file(dir / "propriety.json", j.dump(2) + "\n");
  } else {
    std::ostringstream csv;
    csv << "rule,truth_mu,truth_sigma,best_mu,best_sigma,best_value,truth_is_argmax\n"
        << spec.label() << ',' << scoring::fmt_g17(mu) << ',' << scoring::fmt_g17(sigma) << ','
        << scoring::fmt_g17(res.best_mu) << ',' << scoring::fmt_g17(res.best_sigma) << ','
        << scoring::fmt_g17(res.best_value) << ',' << (res.truth_is_argmax ? "true" : "false")
        << '\n';
    write_file(dir / "propriety.csv", csv.str());
  }
  std::cout << spec.label() << " expected-score argmax at mu " << short_num(res.best_mu)
            << ", sigma " << short_num(res.best_sigma)
            << (res.truth_is_argmax ? " (truth)" : " (NOT the truth)") << "\n";
  return 0;
}

int report_checks(const std::string& name, const std::vector<std::string>& failures) {
  if (failures.empty()) {
    std::cout << "check " << name << ": PASS\n";
    return 0;
  }
  for (const auto& f : failures) std::cout << "check " << name << ": FAIL " << f << "\n";
  return 5;
}

int check_volatility(const scoring::VolatilityConfig& cfg, const scoring::SelectionCurve& curve) {
  std::vector<std::string> failures;
  const double dmax = *std::max_element(cfg.delta_grid.begin(), cfg.delta_grid.end());
  try {
    const auto& crps = curve.at("crps", dmax);
    const auto& scrps = curve.at("scrps", dmax);
    const auto& logs = curve.at("logs", dmax);
    if (!(scrps.prob - crps.prob >= 0.05))
      failures.push_back("scrps-crps selection gap " + short_num(scrps.prob - crps.prob) +
                         " below 0.05 at delta " + short_num(dmax));
    if (!(scrps.wilson.lo > crps.wilson.hi))
      failures.push_back("scrps and crps Wilson intervals overlap at delta " + short_num(dmax));
    if (!(scrps.wilson.lo <= logs.wilson.hi && logs.wilson.lo <= scrps.wilson.hi))
      failures.push_back("scrps and logs Wilson intervals do not overlap at delta " +
                         short_num(dmax));
  } catch (const scoring::ConfigError&) {
    failures.push_back("check needs rules crps, scrps and logs");
  }
  return report_checks("volatility", failures);
}

int check_spatial(const scoring::SpatialConfig& cfg, const scoring::SelectionCurve& curve) {
  std::vector<std::string> failures;
  double delta = cfg.delta_grid[cfg.delta_grid.size() / 2];
  for (double d : cfg.delta_grid)
    if (d == 10.0) delta = d;
  try {
    const auto& crps = curve.at("crps", delta);
    const auto& scrps = curve.at("scrps", delta);
    if (cfg.outlier) {
      const auto& rcrps = curve.at("rcrps_c2", delta);
      const auto& rscrps = curve.at("rscrps_c2", delta);
      if (!(rscrps.prob >= scrps.prob))
        failures.push_back("contaminated: rscrps rate " + short_num(rscrps.prob) +
                           " below scrps rate " + short_num(scrps.prob));
      if (!(rcrps.prob >= crps.prob))
        failures.push_back("contaminated: rcrps rate " + short_num(rcrps.prob) +
                           " below crps rate " + short_num(crps.prob));
      if (rscrps.wilson.lo <= scrps.wilson.hi && scrps.wilson.lo <= rscrps.wilson.hi)
        std::cout << "check spatial: note rscrps/scrps intervals overlap (ordering is by point "
                     "estimate)\n";
    } else {
      if (!(scrps.prob >= crps.prob))
        failures.push_back("scrps rate " + short_num(scrps.prob) + " below crps rate " +
                           short_num(crps.prob) + " at delta " + short_num(delta));
    }
  } catch (const scoring::ConfigError&) {
    failures.push_back("check needs rules crps, scrps (and rcrps:c=2, rscrps:c=2 with outlier)");
  }
  return report_checks("spatial", failures);
}

int check_nbreg(const scoring::NbRegResult& res) {
  std::vector<std::string> failures;
  const std::size_t n = res.per_obs.size();
  const std::size_t k90 = static_cast<std::size_t>(0.9 * static_cast<double>(n));
  const auto& t = res.topk.at(k90 - 1);
  const double crps_dep = std::abs(t.crps_ratio - 1.0);
  const double scrps_dep = std::abs(t.scrps_ratio - 1.0);
  if (!(crps_dep >= 3.0 * scrps_dep))
    failures.push_back("top-k curve: crps departure " + short_num(crps_dep) + " not >= 3x scrps " +
                       short_num(scrps_dep));
  if (!(res.rho_scrps_scaled > res.rho_scrps_raw))
    failures.push_back("|scrps| does not rank with scaled residuals over raw");
  if (!(res.rho_crps_raw > res.rho_crps_scaled))
    failures.push_back("|crps| does not rank with raw residuals over scaled");
  return report_checks("nbreg", failures);
}

int check_surface(const scoring::SurfaceConfig& cfg, const scoring::SurfaceResult& res) {
  std::vector<std::string> failures;
  const std::size_t n = res.ratio_grid.size();
  if (n % 2 == 0 || std::abs(cfg.ratio_lo * cfg.ratio_hi - 1.0) > 1e-9) {
    failures.push_back("check needs an odd grid with ratio_lo = 1/ratio_hi");
    return report_checks("surface", failures);
  }
  const auto asymmetry = [](const std::vector<std::vector<double>>& m) {
    double worst = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) {
        worst = std::max(worst, std::abs(m[i][j] - m[j][i]));
        lo = std::min(lo, m[i][j]);
        hi = std::max(hi, m[i][j]);
      }
    return hi > lo ? worst / (hi - lo) : 0.0;
  };
  for (const std::string lbl : {"scrps", "logs"}) {
    if (!res.sigma_surface.count(lbl)) {
      failures.push_back("check needs rule " + lbl);
      continue;
    }
    const double a1 = asymmetry(res.sigma_surface.at(lbl));
    const double a2 = asymmetry(res.mu_surface.at(lbl));
    if (a1 > 0.02) failures.push_back(lbl + " sigma sheet asymmetry " + short_num(a1) + " > 2%");
    if (a2 > 0.02) failures.push_back(lbl + " mu sheet asymmetry " + short_num(a2) + " > 2%");
  }
  if (res.sigma_surface.count("crps")) {
    const auto& m = res.sigma_surface.at("crps");
    const std::size_t c = n / 2;
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c) continue;
      const double den = m[i][c] - m[c][c];
      if (den == 0.0) continue;
      sum += (m[c][i] - m[c][c]) / den;
      ++cnt;
    }
    const double ratio = cnt ? sum / static_cast<double>(cnt) : 0.0;
    const double want = cfg.sigma2 / cfg.sigma1;
    if (!(std::abs(ratio - want) <= 0.2 * want))
      failures.push_back("crps asymmetry ratio " + short_num(ratio) + " not within 20% of " +
                         short_num(want));
  } else {
    failures.push_back("check needs rule crps");
  }
  return report_checks("surface", failures);
}

int check_entropy(const scoring::EntropyTraceConfig& cfg, const scoring::EntropyTraceResult& res) {
  std::vector<std::string> failures;
  double worst_h = 0.0, worst_id = 0.0;
  std::vector<double> xs;
  xs.reserve(res.rows.size());
  for (const auto& r : res.rows) {
    const double sd = cfg.sigma_y * std::exp(r.x);
    worst_h = std::max(worst_h, std::abs(r.crps_entropy + sd / scoring::kSqrtPi));
    worst_id = std::max({worst_id, std::abs(r.crps - r.crps_entropy - r.crps_residual),
                         std::abs(r.scrps - r.scrps_entropy - r.scrps_residual),
                         std::abs(r.logs - r.logs_entropy - r.logs_residual)});
    xs.push_back(r.x);
  }
  if (worst_h > 1e-9)
    failures.push_back("crps entropy deviates from -sd/sqrt(pi) by " + short_num(worst_h));
  if (worst_id > 1e-12)
    failures.push_back("score != entropy + residual, worst " + short_num(worst_id));

  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const double med = sorted[sorted.size() / 2];
  const auto half_sd = [&](bool high) {
    std::vector<double> v;
    for (std::size_t i = 0; i < res.rows.size(); ++i)
      if (high ? xs[i] > med : xs[i] < med) v.push_back(res.rows[i].scrps_residual);
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return std::sqrt(s2 / static_cast<double>(v.size() - 1));
  };
  const double ratio = half_sd(true) / half_sd(false);
  if (!(ratio >= 0.8 && ratio <= 1.25))
    failures.push_back("scrps residual sd ratio across volatility halves " + short_num(ratio) +
                       " outside [0.8, 1.25]");
  return report_checks("entropy", failures);
}

int run_experiment(const std::string& name, const std::string& config, const std::string& out_dir,
                   bool seed_given, std::uint64_t seed, bool check) {
  const fs::path dir = ensure_outdir(out_dir);
  if (name == "volatility") {
    scoring::VolatilityConfig cfg =
        config.empty() ? scoring::VolatilityConfig{} : scoring::load_volatility_config(config);
    if (seed_given) cfg.seed = seed;
    const auto curve = scoring::run_volatility(cfg);
    std::ostringstream csv;
    scoring::write_selection_csv(csv, curve);
    write_file(dir / "selection_volatility.csv", csv.str());
    write_file(dir / "volatility_summary.json", scoring::volatility_summary_json(cfg, curve));
    std::cout << "volatility: " << curve.rows.size() << " selection rows written to "
              << dir.string() << "\n";
    return check ? check_volatility(cfg, curve) : 0;
  }
  if (name == "spatial") {
    scoring::SpatialConfig cfg =
        config.empty() ? scoring::SpatialConfig{} : scoring::load_spatial_config(config);
    if (seed_given) cfg.seed = seed;
    const auto curve = scoring::run_spatial(cfg);
    std::ostringstream csv;
    scoring::write_selection_csv(csv, curve);
    write_file(dir / "selection_spatial.csv", csv.str());
    write_file(dir / "spatial_summary.json", scoring::spatial_summary_json(cfg, curve));
    std::cout << "spatial: " << curve.rows.size() << " selection rows written to " << dir.string()
              << "\n";
    return check ? check_spatial(cfg, curve) : 0;
  }
  if (name == "nbreg") {
    scoring::NbRegConfig cfg =
        config.empty() ? scoring::NbRegConfig{} : scoring::load_nbreg_config(config);
    if (seed_given) cfg.seed = seed;
    const auto res = scoring::run_nbreg(cfg);
    std::ostringstream obs, topk;
    scoring::write_nbreg_obs_csv(obs, res);
    scoring::write_nbreg_topk_csv(topk, res);
    write_file(dir / "nbreg_obs.csv", obs.str());
    write_file(dir / "nbreg_topk.csv", topk.str());
    write_file(dir / "nbreg_summary.json", scoring::nbreg_summary_json(cfg, res));
    std::cout << "nbreg: fitted s " << short_num(res.fit.s) << ", outputs written to "
              << dir.string() << "\n";
    return check ? check_nbreg(res) : 0;
  }
  if (name == "surface") {
    scoring::SurfaceConfig cfg =
        config.empty() ? scoring::SurfaceConfig{} : scoring::load_surface_config(config);
    const auto res = scoring::figure1_surfaces(cfg);
    for (const auto& rule : cfg.rules) {
      const std::string label = scoring::RuleSpec::parse(rule).label();
      std::ostringstream csv;
      scoring::write_surface_csv(csv, res, label);
      write_file(dir / ("surface_" + label + ".csv"), csv.str());
    }
    write_file(dir / "surface_summary.json", scoring::surface_summary_json(cfg, res));
    std::cout << "surface: " << cfg.rules.size() << " rule sheets written to " << dir.string()
              << "\n";
    return check ? check_surface(cfg, res) : 0;
  }
  if (name == "entropy") {
    scoring::EntropyTraceConfig cfg =
        config.empty() ? scoring::EntropyTraceConfig{} : scoring::load_entropy_config(config);
    if (seed_given) cfg.seed = seed;
    const auto res = scoring::entropy_decomposition_trace(cfg);
    std::ostringstream csv;
    scoring::write_entropy_csv(csv, res);
    write_file(dir / "entropy_trace.csv", csv.str());
    write_file(dir / "entropy_summary.json", scoring::entropy_summary_json(cfg, res));
    std::cout << "entropy: " << res.rows.size() << " rows written to " << dir.string() << "\n";
    return check ? check_entropy(cfg, res) : 0;
  }
  std::cerr << "unknown experiment '" << name << "'\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proper scoring rules: score datasets, run diagnostics and simulation studies"};
  app.require_subcommand(1);

  std::string input, rules, out_dir = ".", format = "csv";
  std::uint64_t seed = scoring::ScoreEnv{}.seed;
  std::size_t mc_budget = scoring::MCBudget{}.n;
  bool negate = false;

  auto* score_cmd = app.add_subcommand("score", "score a dataset file under one or more rules");
  score_cmd->add_option("--input", input, "CSV with header id,kind,params,y")->required();
  score_cmd->add_option("--rules", rules,
                        "comma-separated rule specs, e.g. crps,scrps,logs,rcrps:c=2")
      ->required();
  score_cmd->add_option("--seed", seed, "root seed for Monte-Carlo paths");
  score_cmd->add_option("--out", out_dir, "output directory");
  score_cmd->add_option("--format", format, "per-observation output format")
      ->check(CLI::IsMember({"csv", "json"}));
  score_cmd->add_option("--mc-budget", mc_budget, "draws per Monte-Carlo expectation");
  score_cmd->add_flag("--negate", negate, "emit negatively oriented scores");

  auto* diag = app.add_subcommand("diagnose", "scale, sensitivity and propriety diagnostics");
  diag->require_subcommand(1);
  std::string rule, dist = "gaussian:0,1";
  double c_flag = 2.0;
  auto* diag_rule = diag->add_option("--rule", rule, "rule spec, e.g. scrps or rcrps:c=2");
  auto* diag_c = diag->add_option("--c", c_flag, "truncation level for robust/kernel rules");
  diag->add_option("--dist", dist, "base distribution kind:params (default gaussian:0,1)");
  diag->add_option("--seed", seed, "root seed for Monte-Carlo paths");
  diag->add_option("--mc-budget", mc_budget, "draws per Monte-Carlo expectation");
  diag->add_option("--out", out_dir, "output directory");
  diag->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

  std::string sigmas = "0.1,1,10", direction = "0,1", ys;
  auto* scale_cmd = diag->add_subcommand("scale", "scale function across sigma");
  scale_cmd->fallthrough();
  scale_cmd->add_option("--sigmas", sigmas, "comma-separated sigma grid");
  scale_cmd->add_option("--direction", direction, "perturbation direction mu,sigma");

  auto* sens_cmd = diag->add_subcommand("sensitivity", "tail-sensitivity exponent");
  sens_cmd->fallthrough();
  sens_cmd->add_option("--ys", ys, "comma-separated y grid (default geometric 1e2..1e5)");

  double truth_mu = 0.0, truth_sigma = 1.0;
  std::size_t grid_n = 41;
  auto* prop_cmd = diag->add_subcommand("propriety", "expected-score argmax sweep");
  prop_cmd->fallthrough();
  prop_cmd->add_option("--mu", truth_mu, "truth mean");
  prop_cmd->add_option("--sigma", truth_sigma, "truth standard deviation");
  prop_cmd->add_option("--grid-n", grid_n, "sweep grid side length");

  auto* exp_cmd = app.add_subcommand("experiment", "simulation studies");
  exp_cmd->require_subcommand(1);
  std::string config;
  bool check = false;
  exp_cmd->add_option("--config", config, "JSON config file (defaults when omitted)");
  exp_cmd->add_option("--out", out_dir, "output directory");
  auto* exp_seed = exp_cmd->add_option("--seed", seed, "override the config seed");
  exp_cmd->add_flag("--check", check, "run the acceptance assertions after the experiment");
  std::vector<CLI::App*> exp_subs;
  for (const char* name : {"volatility", "spatial", "nbreg", "surface", "entropy"}) {
    auto* sub = exp_cmd->add_subcommand(name);
    sub->fallthrough();
    exp_subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const bool in_experiment = exp_cmd->parsed();
  try {
    if (score_cmd->parsed())
      return run_score(input, rules, out_dir, format, seed, mc_budget, negate);
    if (diag->parsed()) {
      if (!diag_rule->count()) {
        std::cerr << "diagnose: --rule is required\n";
        return 2;
      }
      const bool has_c = diag_c->count() > 0;
      if (scale_cmd->parsed())
        return run_diag_scale(rule, has_c, c_flag, dist, sigmas, direction, out_dir, format, seed,
                              mc_budget);
      if (sens_cmd->parsed())
        return run_diag_sensitivity(rule, has_c, c_flag, dist, ys, out_dir, format, seed,
                                    mc_budget);
      if (prop_cmd->parsed())
        return run_diag_propriety(rule, has_c, c_flag, truth_mu, truth_sigma, grid_n, out_dir,
                                  format);
    }
    if (in_experiment) {
      for (auto* sub : exp_subs)
        if (sub->parsed())
          return run_experiment(sub->get_name(), config, out_dir, exp_seed->count() > 0, seed,
                                check);
    }
    std::cerr << app.help();
    return 2;
  } catch (const scoring::ParseError& e) {
    std::cerr << "parse error (line " << e.line_number << "): " << e.what() << "\n";
    return 2;
  } catch (const scoring::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const scoring::NoiseDominated& e) {
    std::cerr << "diagnostic noise: " << e.what()
              << "\nhint: raise --mc-budget, shrink the probe, or use a base distribution with "
                 "an analytic path\n";
    return 4;
  } catch (const scoring::UnsupportedDistribution& e) {
    std::cerr << "rule mismatch: " << e.what() << "\n";
    return 3;
  } catch (const scoring::SupportError& e) {
    std::cerr << "rule mismatch: " << e.what() << "\n";
    return 3;
  } catch (const scoring::DegenerateDistribution& e) {
    std::cerr << "rule mismatch: " << e.what() << "\n";
    return 3;
  } catch (const scoring::Error& e) {
    std::cerr << (in_experiment ? "experiment failure: " : "error: ") << e.what() << "\n";
    return in_experiment ? 5 : 1;
  }
}

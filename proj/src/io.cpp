#include "scoring/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace scoring {

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_number(const std::string& raw, std::size_t line) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end || s.empty())
    throw ParseError("not a number: '" + s + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite number: '" + s + "'", line);
  return v;
}

Distribution make_distribution(const std::string& kind, const std::string& params,
                               std::size_t line) {
  try {
    if (kind == "ensemble") {
      std::vector<double> members;
      for (const auto& tok : split(params, '|')) members.push_back(parse_number(tok, line));
      return Distribution{Ensemble{std::move(members)}};
    }
    const auto parts = split(params, ';');
    if (parts.size() != 2)
      throw ParseError("kind '" + kind + "' takes two params, got " +
                           std::to_string(parts.size()),
                       line);
    const double a = parse_number(parts[0], line);
    const double b = parse_number(parts[1], line);
    if (kind == "gaussian") return Distribution{Gaussian{a, b}};
    if (kind == "laplace") return Distribution{Laplace{a, b}};
    if (kind == "negbin") return Distribution{NegBin{a, b}};
    throw ParseError("unknown kind '" + kind + "'", line);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), line);
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse failure in " + path + ": " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

void check_experiment_tag(const json& j, const std::string& expected, const std::string& where) {
  if (j.contains("experiment") && j["experiment"].get<std::string>() != expected)
    throw ConfigError(where + ": experiment tag is '" + j["experiment"].get<std::string>() +
                      "', expected '" + expected + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": key '" + std::string(key) + "' has the wrong type");
  }
}

json wilson_row(const SelectionRow& r) {
  return json{{"rule", r.rule},
              {"delta", r.delta},
              {"correct", r.correct},
              {"replicates", r.replicates},
              {"prob", r.prob},
              {"wilson_lo", r.wilson.lo},
              {"wilson_hi", r.wilson.hi}};
}

json volatility_config_echo(const VolatilityConfig& c) {
  return json{{"experiment", "volatility"},
              {"a", c.a},
              {"sigma_x", c.sigma_x},
              {"sigma_y", c.sigma_y},
              {"series_len", c.series_len},
              {"replicates", c.replicates},
              {"delta_grid", c.delta_grid},
              {"rules", c.rules},
              {"seed", c.seed}};
}

json spatial_config_echo(const SpatialConfig& c) {
  json j{{"experiment", "spatial"},
         {"n_locations", c.n_locations},
         {"kappa", c.params.kappa},
         {"sigma", c.params.sigma},
         {"nu", c.params.nu},
         {"delta_grid", c.delta_grid},
         {"replicates", c.replicates},
         {"rules", c.rules},
         {"seed", c.seed}};
  if (c.outlier)
    j["outlier"] = json{{"count", c.outlier->count}, {"noise_sd", c.outlier->noise_sd}};
  return j;
}

json nbreg_config_echo(const NbRegConfig& c) {
  return json{{"experiment", "nbreg"}, {"n_obs", c.n_obs},
              {"k_covariates", c.k_covariates}, {"theta", c.theta},
              {"s", c.s},               {"seed", c.seed}};
}

json surface_config_echo(const SurfaceConfig& c) {
  return json{{"experiment", "surface"},
              {"sigma1", c.sigma1},
              {"sigma2", c.sigma2},
              {"grid_n", c.grid_n},
              {"ratio_lo", c.ratio_lo},
              {"ratio_hi", c.ratio_hi},
              {"p_lo", c.p_lo},
              {"p_hi", c.p_hi},
              {"rules", c.rules}};
}

json entropy_config_echo(const EntropyTraceConfig& c) {
  return json{{"experiment", "entropy"}, {"a", c.a},
              {"sigma_x", c.sigma_x},    {"sigma_y", c.sigma_y},
              {"series_len", c.series_len}, {"seed", c.seed}};
}

}  // namespace

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Record> parse_observations_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<Record> records;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (!saw_header) {
      const auto cols = split(stripped, ',');
      if (cols.size() != 4 || trim(cols[0]) != "id" || trim(cols[1]) != "kind" ||
          trim(cols[2]) != "params" || trim(cols[3]) != "y")
        throw ParseError("expected header 'id,kind,params,y'", lineno);
      saw_header = true;
      continue;
    }
    const auto cols = split(stripped, ',');
    if (cols.size() != 4)
      throw ParseError("expected 4 columns, got " + std::to_string(cols.size()), lineno);
    std::string id = trim(cols[0]);
    if (id.empty()) throw ParseError("empty id", lineno);
    Distribution dist = make_distribution(trim(cols[1]), trim(cols[2]), lineno);
    const double y = parse_number(cols[3], lineno);
    records.push_back(Record{std::move(id), Observation{std::move(dist), y}});
  }
  if (!saw_header) throw ParseError("empty input: missing header", 1);
  return records;
}

std::vector<Record> read_observations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file: " + path, 0);
  return parse_observations_csv(in);
}

void write_scores_csv(std::ostream& out, const std::vector<Record>& records,
                      const std::vector<ScoreReport>& reports, bool negate) {
  const double sign = negate ? -1.0 : 1.0;
  out << "id,rule,score,entropy,residual,method\n";
  for (const auto& rep : reports) {
    if (rep.per_obs.size() != records.size())
      throw DimensionMismatch("write_scores_csv: report rows vs records");
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& row = rep.per_obs[i];
      out << records[i].id << ',' << rep.rule_label << ',' << fmt_g17(sign * row.score) << ','
          << fmt_g17(sign * row.entropy) << ',' << fmt_g17(sign * row.residual) << ','
          << method_name(row.method) << '\n';
    }
  }
}

std::vector<ScoreCsvRow> parse_scores_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<ScoreCsvRow> rows;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (!saw_header) {
      if (stripped != "id,rule,score,entropy,residual,method")
        throw ParseError("expected scores header", lineno);
      saw_header = true;
      continue;
    }
    const auto cols = split(stripped, ',');
    if (cols.size() != 6)
      throw ParseError("expected 6 columns, got " + std::to_string(cols.size()), lineno);
    ScoreCsvRow r;
    r.id = trim(cols[0]);
    r.rule = trim(cols[1]);
    r.score = parse_number(cols[2], lineno);
    r.entropy = parse_number(cols[3], lineno);
    r.residual = parse_number(cols[4], lineno);
    r.method = trim(cols[5]);
    rows.push_back(std::move(r));
  }
  if (!saw_header) throw ParseError("empty input: missing header", 1);
  return rows;
}

std::string scores_summary_json(const ScoreRunMeta& meta, const std::vector<Record>& records,
                                const std::vector<ScoreReport>& reports) {
  const double sign = meta.negate ? -1.0 : 1.0;
  json rules = json::array();
  for (const auto& rep : reports) {
    double entropy_sum = 0.0;
    for (const auto& row : rep.per_obs) entropy_sum += row.entropy;
    const double n = rep.per_obs.empty() ? 1.0 : static_cast<double>(rep.per_obs.size());
    rules.push_back(json{{"rule", rep.rule_label},
                         {"average", sign * rep.average},
                         {"average_entropy", sign * entropy_sum / n}});
  }
  json j{{"version", kVersion},
         {"command", "score"},
         {"n", records.size()},
         {"input", meta.input},
         {"seed", meta.seed},
         {"mc_budget", meta.mc_budget},
         {"negate", meta.negate},
         {"rules", std::move(rules)}};
  return j.dump(2) + "\n";
}

void write_selection_csv(std::ostream& out, const SelectionCurve& curve) {
  out << "rule,delta,correct,replicates,prob,wilson_lo,wilson_hi\n";
  for (const auto& r : curve.rows)
    out << r.rule << ',' << fmt_g17(r.delta) << ',' << r.correct << ',' << r.replicates << ','
        << fmt_g17(r.prob) << ',' << fmt_g17(r.wilson.lo) << ',' << fmt_g17(r.wilson.hi) << '\n';
}

std::string volatility_summary_json(const VolatilityConfig& cfg, const SelectionCurve& curve) {
  json rows = json::array();
  for (const auto& r : curve.rows) rows.push_back(wilson_row(r));
  json j{{"version", kVersion}, {"config", volatility_config_echo(cfg)}, {"rows", std::move(rows)}};
  return j.dump(2) + "\n";
}

std::string spatial_summary_json(const SpatialConfig& cfg, const SelectionCurve& curve) {
  json rows = json::array();
  for (const auto& r : curve.rows) rows.push_back(wilson_row(r));
  json j{{"version", kVersion}, {"config", spatial_config_echo(cfg)}, {"rows", std::move(rows)}};
  return j.dump(2) + "\n";
}

void write_nbreg_obs_csv(std::ostream& out, const NbRegResult& r) {
  out << "y,mu_hat,crps,scrps,raw_residual,scaled_residual\n";
  for (const auto& o : r.per_obs)
    out << fmt_g17(o.y) << ',' << fmt_g17(o.mu_hat) << ',' << fmt_g17(o.crps) << ','
        << fmt_g17(o.scrps) << ',' << fmt_g17(o.raw_residual) << ','
        << fmt_g17(o.scaled_residual) << '\n';
}

void write_nbreg_topk_csv(std::ostream& out, const NbRegResult& r) {
  out << "k,crps_ratio,scrps_ratio\n";
  for (const auto& t : r.topk)
    out << t.k << ',' << fmt_g17(t.crps_ratio) << ',' << fmt_g17(t.scrps_ratio) << '\n';
}

std::string nbreg_summary_json(const NbRegConfig& cfg, const NbRegResult& r) {
  json j{{"version", kVersion},
         {"config", nbreg_config_echo(cfg)},
         {"fit",
          json{{"theta", r.fit.theta},
               {"theta_se", r.fit.theta_se},
               {"s", r.fit.s},
               {"loglik", r.fit.loglik},
               {"iterations", r.fit.iterations}}},
         {"spearman",
          json{{"crps_raw", r.rho_crps_raw},
               {"crps_scaled", r.rho_crps_scaled},
               {"scrps_raw", r.rho_scrps_raw},
               {"scrps_scaled", r.rho_scrps_scaled}}}};
  return j.dump(2) + "\n";
}

void write_surface_csv(std::ostream& out, const SurfaceResult& r, const std::string& rule_label) {
  const auto sig = r.sigma_surface.find(rule_label);
  const auto mu = r.mu_surface.find(rule_label);
  if (sig == r.sigma_surface.end() || mu == r.mu_surface.end())
    throw ConfigError("surface result has no rule '" + rule_label + "'");
  out << "sheet,axis1,axis2,value\n";
  for (std::size_t i = 0; i < r.ratio_grid.size(); ++i)
    for (std::size_t j = 0; j < r.ratio_grid.size(); ++j)
      out << "sigma," << fmt_g17(r.ratio_grid[i]) << ',' << fmt_g17(r.ratio_grid[j]) << ','
          << fmt_g17(sig->second[i][j]) << '\n';
  for (std::size_t i = 0; i < r.p_grid.size(); ++i)
    for (std::size_t j = 0; j < r.p_grid.size(); ++j)
      out << "mu," << fmt_g17(r.p_grid[i]) << ',' << fmt_g17(r.p_grid[j]) << ','
          << fmt_g17(mu->second[i][j]) << '\n';
}

std::string surface_summary_json(const SurfaceConfig& cfg, const SurfaceResult& r) {
  json rules = json::array();
  for (const auto& [label, grid] : r.sigma_surface) {
    (void)grid;
    rules.push_back(label);
  }
  json j{{"version", kVersion}, {"config", surface_config_echo(cfg)}, {"rule_labels", rules}};
  return j.dump(2) + "\n";
}

void write_entropy_csv(std::ostream& out, const EntropyTraceResult& r) {
  out << "t,x,y,crps,crps_entropy,crps_residual,scrps,scrps_entropy,scrps_residual,"
         "logs,logs_entropy,logs_residual\n";
  for (std::size_t t = 0; t < r.rows.size(); ++t) {
    const auto& w = r.rows[t];
    out << t << ',' << fmt_g17(w.x) << ',' << fmt_g17(w.y) << ',' << fmt_g17(w.crps) << ','
        << fmt_g17(w.crps_entropy) << ',' << fmt_g17(w.crps_residual) << ',' << fmt_g17(w.scrps)
        << ',' << fmt_g17(w.scrps_entropy) << ',' << fmt_g17(w.scrps_residual) << ','
        << fmt_g17(w.logs) << ',' << fmt_g17(w.logs_entropy) << ',' << fmt_g17(w.logs_residual)
        << '\n';
  }
}

std::string entropy_summary_json(const EntropyTraceConfig& cfg, const EntropyTraceResult& r) {
  json j{{"version", kVersion},
         {"config", entropy_config_echo(cfg)},
         {"rows", r.rows.size()}};
  return j.dump(2) + "\n";
}

VolatilityConfig load_volatility_config(const std::string& path) {
  const json j = load_json_file(path);
  check_keys(j,
             {"experiment", "a", "sigma_x", "sigma_y", "series_len", "replicates", "delta_grid",
              "rules", "seed"},
             path);
  check_experiment_tag(j, "volatility", path);
  VolatilityConfig c;
  c.a = get_or(j, "a", c.a, path);
  c.sigma_x = get_or(j, "sigma_x", c.sigma_x, path);
  c.sigma_y = get_or(j, "sigma_y", c.sigma_y, path);
  c.series_len = get_or(j, "series_len", c.series_len, path);
  c.replicates = get_or(j, "replicates", c.replicates, path);
  c.delta_grid = get_or(j, "delta_grid", c.delta_grid, path);
  c.rules = get_or(j, "rules", c.rules, path);
  c.seed = get_or(j, "seed", c.seed, path);
  return c;
}

SpatialConfig load_spatial_config(const std::string& path) {
  const json j = load_json_file(path);
  check_keys(j,
             {"experiment", "n_locations", "kappa", "sigma", "nu", "delta_grid", "replicates",
              "rules", "seed", "outlier"},
             path);
  check_experiment_tag(j, "spatial", path);
  SpatialConfig c;
  c.n_locations = get_or(j, "n_locations", c.n_locations, path);
  c.params.kappa = get_or(j, "kappa", c.params.kappa, path);
  c.params.sigma = get_or(j, "sigma", c.params.sigma, path);
  c.params.nu = get_or(j, "nu", c.params.nu, path);
  c.delta_grid = get_or(j, "delta_grid", c.delta_grid, path);
  c.replicates = get_or(j, "replicates", c.replicates, path);
  c.rules = get_or(j, "rules", c.rules, path);
  c.seed = get_or(j, "seed", c.seed, path);
  if (j.contains("outlier")) {
    check_keys(j["outlier"], {"count", "noise_sd"}, path + " outlier");
    OutlierSpec o;
    o.count = get_or(j["outlier"], "count", o.count, path);
    o.noise_sd = get_or(j["outlier"], "noise_sd", o.noise_sd, path);
    c.outlier = o;
  }
  return c;
}

NbRegConfig load_nbreg_config(const std::string& path) {
  const json j = load_json_file(path);
  check_keys(j, {"experiment", "n_obs", "k_covariates", "theta", "s", "seed"}, path);
  check_experiment_tag(j, "nbreg", path);
  NbRegConfig c;
  c.n_obs = get_or(j, "n_obs", c.n_obs, path);
  c.k_covariates = get_or(j, "k_covariates", c.k_covariates, path);
  c.theta = get_or(j, "theta", c.theta, path);
  c.s = get_or(j, "s", c.s, path);
  c.seed = get_or(j, "seed", c.seed, path);
  return c;
}

SurfaceConfig load_surface_config(const std::string& path) {
  const json j = load_json_file(path);
  check_keys(j,
             {"experiment", "sigma1", "sigma2", "grid_n", "ratio_lo", "ratio_hi", "p_lo", "p_hi",
              "rules"},
             path);
  check_experiment_tag(j, "surface", path);
  SurfaceConfig c;
  c.sigma1 = get_or(j, "sigma1", c.sigma1, path);
  c.sigma2 = get_or(j, "sigma2", c.sigma2, path);
  c.grid_n = get_or(j, "grid_n", c.grid_n, path);
  c.ratio_lo = get_or(j, "ratio_lo", c.ratio_lo, path);
  c.ratio_hi = get_or(j, "ratio_hi", c.ratio_hi, path);
  c.p_lo = get_or(j, "p_lo", c.p_lo, path);
  c.p_hi = get_or(j, "p_hi", c.p_hi, path);
  c.rules = get_or(j, "rules", c.rules, path);
  return c;
}

EntropyTraceConfig load_entropy_config(const std::string& path) {
  const json j = load_json_file(path);
  check_keys(j, {"experiment", "a", "sigma_x", "sigma_y", "series_len", "seed"}, path);
  check_experiment_tag(j, "entropy", path);
  EntropyTraceConfig c;
  c.a = get_or(j, "a", c.a, path);
  c.sigma_x = get_or(j, "sigma_x", c.sigma_x, path);
  c.sigma_y = get_or(j, "sigma_y", c.sigma_y, path);
  c.series_len = get_or(j, "series_len", c.series_len, path);
  c.seed = get_or(j, "seed", c.seed, path);
  return c;
}

}  // namespace scoring

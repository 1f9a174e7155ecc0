#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "scoring/io.hpp"

using namespace scoring;

namespace {

std::string temp_json(const std::string& stem, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / (stem + ".json");
  std::ofstream out(path);
  out << body;
  return path.string();
}

}  // namespace

TEST_CASE("fmt_g17 round trips doubles exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e-308, 12345.678901234567, -2.5e17, 0.0}) {
    std::string s = fmt_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("observation csv parses every kind") {
  std::istringstream in(
      "id,kind,params,y\n"
      "g1,gaussian,0;1,0.3\n"
      "\n"
      "l1,laplace,1;0.5,0.2\n"
      "nb1,negbin,2;5,1\n"
      "e1,ensemble,-0.4|0.1|0.7,0.5\n");
  auto records = parse_observations_csv(in);
  REQUIRE(records.size() == 4);
  CHECK(records[0].id == "g1");
  REQUIRE(std::holds_alternative<Gaussian>(records[0].obs.dist));
  CHECK(std::get<Gaussian>(records[0].obs.dist).sigma == 1.0);
  CHECK(records[0].obs.y == 0.3);
  CHECK(std::holds_alternative<Laplace>(records[1].obs.dist));
  CHECK(std::holds_alternative<NegBin>(records[2].obs.dist));
  REQUIRE(std::holds_alternative<Ensemble>(records[3].obs.dist));
  CHECK(std::get<Ensemble>(records[3].obs.dist).members.size() == 3);
}

TEST_CASE("observation csv reports the failing line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_observations_csv(in);
    } catch (const ParseError& e) {
      return e.line_number;
    }
    return 0;
  };
  CHECK(line_of("a,b,c\n") == 1);                                   // bad header
  CHECK(line_of("id,kind,params,y\nr1,gaussian,0;1\n") == 2);       // column count
  CHECK(line_of("id,kind,params,y\nr1,weibull,1;2,0\n") == 2);      // unknown kind
  CHECK(line_of("id,kind,params,y\nr1,gaussian,0;1,zzz\n") == 2);   // bad number
  CHECK(line_of("id,kind,params,y\nr1,gaussian,0;-1,0\n") == 2);    // sigma <= 0
  CHECK(line_of("id,kind,params,y\nok,gaussian,0;1,0\n,gaussian,0;1,0\n") == 3);  // empty id
  CHECK(line_of("") == 1);                                          // empty input
  CHECK(line_of("\n\nid,kind,params\n") == 3);  // header checked where it appears
  CHECK_THROWS_AS(read_observations_csv("/nonexistent/path.csv"), ParseError);
}

TEST_CASE("scores csv round trip") {
  std::vector<Record> records;
  records.push_back(Record{"a", Observation{Distribution{Gaussian{0.0, 1.0}}, 0.1}});
  records.push_back(Record{"b", Observation{Distribution{Gaussian{1.0, 2.0}}, -0.4}});
  ScoreReport rep;
  rep.rule_label = "crps";
  rep.per_obs = {{-0.3, -0.56418958354775628, 0.26418958354775628, Method::analytic},
                 {1.0 / 3.0, -1.1283791670955126, 1.4617124004288459, Method::monte_carlo}};
  rep.average = (rep.per_obs[0].score + rep.per_obs[1].score) / 2.0;

  std::ostringstream out;
  write_scores_csv(out, records, {rep});
  std::istringstream back(out.str());
  auto rows = parse_scores_csv(back);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].id == "a");
  CHECK(rows[0].rule == "crps");
  CHECK(rows[0].score == rep.per_obs[0].score);
  CHECK(rows[0].entropy == rep.per_obs[0].entropy);
  CHECK(rows[0].residual == rep.per_obs[0].residual);
  CHECK(rows[0].method == "analytic");
  CHECK(rows[1].score == rep.per_obs[1].score);
  CHECK(rows[1].method == "monte_carlo");

  std::ostringstream neg;
  write_scores_csv(neg, records, {rep}, true);
  std::istringstream negin(neg.str());
  auto negrows = parse_scores_csv(negin);
  CHECK(negrows[0].score == -rep.per_obs[0].score);
  CHECK(negrows[0].entropy == -rep.per_obs[0].entropy);

  ScoreReport short_rep = rep;
  short_rep.per_obs.pop_back();
  std::ostringstream sink;
  CHECK_THROWS_AS(write_scores_csv(sink, records, {short_rep}), DimensionMismatch);
}

TEST_CASE("scores csv parser rejects malformed input") {
  std::istringstream bad_header("id,rule,score\n");
  CHECK_THROWS_AS(parse_scores_csv(bad_header), ParseError);
  std::istringstream short_row("id,rule,score,entropy,residual,method\na,crps,1,2\n");
  CHECK_THROWS_AS(parse_scores_csv(short_row), ParseError);
}

TEST_CASE("score summary json") {
  std::vector<Record> records;
  records.push_back(Record{"a", Observation{Distribution{Gaussian{0.0, 1.0}}, 0.1}});
  ScoreReport rep;
  rep.rule_label = "logs";
  rep.per_obs = {{-1.0, -1.4, 0.4, Method::analytic}};
  rep.average = -1.0;
  ScoreRunMeta meta;
  meta.input = "input.csv";
  meta.seed = 99;
  meta.mc_budget = 1000;
  auto j = nlohmann::json::parse(scores_summary_json(meta, records, {rep}));
  CHECK(j["version"] == kVersion);
  CHECK(j["n"] == 1);
  CHECK(j["input"] == "input.csv");
  CHECK(j["rules"][0]["rule"] == "logs");
  CHECK(j["rules"][0]["average"].get<double>() == -1.0);
  CHECK(j["rules"][0]["average_entropy"].get<double>() == -1.4);
}

TEST_CASE("selection csv and summary json") {
  SelectionCurve curve;
  SelectionRow row;
  row.rule = "scrps";
  row.delta = 0.4;
  row.correct = 160;
  row.replicates = 200;
  row.prob = 0.8;
  row.wilson = wilson_interval(160, 200);
  curve.rows.push_back(row);
  std::ostringstream out;
  write_selection_csv(out, curve);
  std::istringstream lines(out.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "rule,delta,correct,replicates,prob,wilson_lo,wilson_hi");
  CHECK(first.substr(0, 6) == "scrps,");

  VolatilityConfig cfg;
  auto j = nlohmann::json::parse(volatility_summary_json(cfg, curve));
  CHECK(j["version"] == kVersion);
  CHECK(j["config"]["experiment"] == "volatility");
  CHECK(j["config"]["a"].get<double>() == cfg.a);
  CHECK(j["rows"][0]["rule"] == "scrps");
  CHECK(j["rows"][0]["correct"] == 160);

  SpatialConfig scfg;
  scfg.outlier = OutlierSpec{2, 3.0};
  auto js = nlohmann::json::parse(spatial_summary_json(scfg, curve));
  CHECK(js["config"]["experiment"] == "spatial");
  CHECK(js["config"]["outlier"]["count"] == 2);
}

TEST_CASE("nbreg writers") {
  NbRegResult r;
  r.fit.theta = {1.0, -0.5};
  r.fit.theta_se = {0.1, 0.2};
  r.fit.s = 4.5;
  r.fit.loglik = -100.0;
  r.fit.iterations = 7;
  r.per_obs = {{3.0, 2.5, -0.4, -1.1, 0.5, 0.3}, {1.0, 1.5, -0.6, -1.2, -0.5, -0.4}};
  r.topk = {{1, 0.8, 0.9}, {2, 1.0, 1.0}};
  r.rho_crps_raw = 0.4;
  r.rho_crps_scaled = 0.3;
  r.rho_scrps_raw = 0.2;
  r.rho_scrps_scaled = 0.5;

  std::ostringstream obs;
  write_nbreg_obs_csv(obs, r);
  std::istringstream obs_lines(obs.str());
  std::string line;
  std::getline(obs_lines, line);
  CHECK(line == "y,mu_hat,crps,scrps,raw_residual,scaled_residual");
  std::size_t n = 0;
  while (std::getline(obs_lines, line))
    if (!line.empty()) ++n;
  CHECK(n == 2);

  std::ostringstream topk;
  write_nbreg_topk_csv(topk, r);
  CHECK(topk.str().substr(0, 25) == "k,crps_ratio,scrps_ratio\n");

  NbRegConfig cfg;
  auto j = nlohmann::json::parse(nbreg_summary_json(cfg, r));
  CHECK(j["version"] == kVersion);
  CHECK(j["fit"]["s"].get<double>() == 4.5);
  CHECK(j["spearman"]["crps_raw"].get<double>() == 0.4);
}

TEST_CASE("surface and entropy writers") {
  SurfaceConfig cfg;
  cfg.grid_n = 5;
  SurfaceResult r = figure1_surfaces(cfg);
  std::ostringstream out;
  write_surface_csv(out, r, "crps");
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "sheet,axis1,axis2,value");
  std::size_t sigma_rows = 0, mu_rows = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("sigma,", 0) == 0) ++sigma_rows;
    if (line.rfind("mu,", 0) == 0) ++mu_rows;
  }
  CHECK(sigma_rows == 25);
  CHECK(mu_rows == 25);
  std::ostringstream sink;
  CHECK_THROWS_AS(write_surface_csv(sink, r, "dss"), ConfigError);
  auto j = nlohmann::json::parse(surface_summary_json(cfg, r));
  CHECK(j["config"]["grid_n"] == 5);
  CHECK(j["rule_labels"].size() == 3);

  EntropyTraceConfig ecfg;
  ecfg.series_len = 4;
  EntropyTraceResult er = entropy_decomposition_trace(ecfg);
  std::ostringstream eout;
  write_entropy_csv(eout, er);
  std::istringstream elines(eout.str());
  std::getline(elines, line);
  CHECK(line ==
        "t,x,y,crps,crps_entropy,crps_residual,scrps,scrps_entropy,scrps_residual,"
        "logs,logs_entropy,logs_residual");
  auto ej = nlohmann::json::parse(entropy_summary_json(ecfg, er));
  CHECK(ej["rows"] == 4);
}

TEST_CASE("volatility config loader") {
  auto path = temp_json("cfg_vol_ok",
                        R"({"experiment":"volatility","a":0.9,"sigma_x":0.4,"sigma_y":1.5,
                            "series_len":50,"replicates":10,"delta_grid":[0.2,0.5],
                            "rules":["crps"],"seed":17})");
  VolatilityConfig c = load_volatility_config(path);
  CHECK(c.a == 0.9);
  CHECK(c.sigma_y == 1.5);
  CHECK(c.series_len == 50);
  CHECK(c.delta_grid == std::vector<double>{0.2, 0.5});
  CHECK(c.rules == std::vector<std::string>{"crps"});
  CHECK(c.seed == 17);

  auto defaults = temp_json("cfg_vol_min", R"({"experiment":"volatility"})");
  VolatilityConfig d = load_volatility_config(defaults);
  CHECK(d.a == 0.95);
  CHECK(d.replicates == 200);

  auto unknown = temp_json("cfg_vol_bad", R"({"experiment":"volatility","sigmma_y":2})");
  CHECK_THROWS_AS(load_volatility_config(unknown), ConfigError);
  auto wrong_tag = temp_json("cfg_vol_tag", R"({"experiment":"spatial"})");
  CHECK_THROWS_AS(load_volatility_config(wrong_tag), ConfigError);
  auto wrong_type = temp_json("cfg_vol_type", R"({"experiment":"volatility","seed":"abc"})");
  CHECK_THROWS_AS(load_volatility_config(wrong_type), ConfigError);
  CHECK_THROWS_AS(load_volatility_config("/nonexistent/cfg.json"), ConfigError);
  auto not_json = temp_json("cfg_vol_syntax", "{nope");
  CHECK_THROWS_AS(load_volatility_config(not_json), ConfigError);
}

TEST_CASE("spatial config loader") {
  auto path = temp_json("cfg_spat_ok",
                        R"({"experiment":"spatial","n_locations":30,"kappa":40,"sigma":1.2,
                            "nu":2.5,"delta_grid":[5],"replicates":20,
                            "rules":["crps","rcrps:c=2"],"seed":3,
                            "outlier":{"count":2,"noise_sd":4.0}})");
  SpatialConfig c = load_spatial_config(path);
  CHECK(c.n_locations == 30);
  CHECK(c.params.kappa == 40.0);
  CHECK(c.params.nu == 2.5);
  REQUIRE(c.outlier.has_value());
  CHECK(c.outlier->count == 2);
  CHECK(c.outlier->noise_sd == 4.0);

  auto no_outlier = temp_json("cfg_spat_min", R"({"experiment":"spatial"})");
  SpatialConfig d = load_spatial_config(no_outlier);
  CHECK_FALSE(d.outlier.has_value());
  CHECK(d.params.kappa == 50.0);

  auto bad_inner = temp_json("cfg_spat_bad",
                             R"({"experiment":"spatial","outlier":{"count":1,"sd":2}})");
  CHECK_THROWS_AS(load_spatial_config(bad_inner), ConfigError);
}

TEST_CASE("nbreg, surface and entropy config loaders") {
  auto nb = temp_json("cfg_nb_ok",
                      R"({"experiment":"nbreg","n_obs":100,"k_covariates":3,
                          "theta":[0.5,0.2,-0.1],"s":2.0,"seed":11})");
  NbRegConfig c = load_nbreg_config(nb);
  CHECK(c.n_obs == 100);
  CHECK(c.theta.size() == 3);
  CHECK(c.s == 2.0);
  auto nb_bad = temp_json("cfg_nb_bad", R"({"experiment":"nbreg","nobs":100})");
  CHECK_THROWS_AS(load_nbreg_config(nb_bad), ConfigError);

  auto sf = temp_json("cfg_surf_ok",
                      R"({"experiment":"surface","grid_n":11,"ratio_lo":0.8,"ratio_hi":1.25})");
  SurfaceConfig s = load_surface_config(sf);
  CHECK(s.grid_n == 11);
  CHECK(s.ratio_lo == 0.8);
  CHECK(s.sigma1 == 0.1);  // default

  auto en = temp_json("cfg_ent_ok", R"({"experiment":"entropy","series_len":25,"seed":4})");
  EntropyTraceConfig e = load_entropy_config(en);
  CHECK(e.series_len == 25);
  CHECK(e.a == 0.95);  // default
  auto en_tag = temp_json("cfg_ent_tag", R"({"experiment":"volatility"})");
  CHECK_THROWS_AS(load_entropy_config(en_tag), ConfigError);
}

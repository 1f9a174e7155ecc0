#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "scoring/experiments.hpp"

namespace scoring {

inline constexpr const char* kVersion = "v0.1.0";

// %.17g: lossless double round trip.
std::string fmt_g17(double v);

struct Record {
  std::string id;
  Observation obs;
};

// Input format: header `id,kind,params,y`; params semicolon-separated
// (ensemble members pipe-separated). Throws ParseError with the 1-based line.
std::vector<Record> parse_observations_csv(std::istream& in);
std::vector<Record> read_observations_csv(const std::string& path);

void write_scores_csv(std::ostream& out, const std::vector<Record>& records,
                      const std::vector<ScoreReport>& reports, bool negate = false);

// Read back what write_scores_csv produced (round-trip checks, plot layer).
struct ScoreCsvRow {
  std::string id;
  std::string rule;
  double score = 0.0;
  double entropy = 0.0;
  double residual = 0.0;
  std::string method;
};
std::vector<ScoreCsvRow> parse_scores_csv(std::istream& in);

struct ScoreRunMeta {
  std::string input;
  std::uint64_t seed = 0;
  std::size_t mc_budget = 0;
  bool negate = false;
};
std::string scores_summary_json(const ScoreRunMeta& meta, const std::vector<Record>& records,
                                const std::vector<ScoreReport>& reports);

void write_selection_csv(std::ostream& out, const SelectionCurve& curve);
std::string volatility_summary_json(const VolatilityConfig& cfg, const SelectionCurve& curve);
std::string spatial_summary_json(const SpatialConfig& cfg, const SelectionCurve& curve);

void write_nbreg_obs_csv(std::ostream& out, const NbRegResult& r);
void write_nbreg_topk_csv(std::ostream& out, const NbRegResult& r);
std::string nbreg_summary_json(const NbRegConfig& cfg, const NbRegResult& r);

// One file per rule; both sheets (sigma and mu misspecification) long-format.
void write_surface_csv(std::ostream& out, const SurfaceResult& r, const std::string& rule_label);
std::string surface_summary_json(const SurfaceConfig& cfg, const SurfaceResult& r);

void write_entropy_csv(std::ostream& out, const EntropyTraceResult& r);
std::string entropy_summary_json(const EntropyTraceConfig& cfg, const EntropyTraceResult& r);

// JSON config files; missing keys fall back to the struct defaults, unknown
// keys raise ConfigError.
VolatilityConfig load_volatility_config(const std::string& path);
SpatialConfig load_spatial_config(const std::string& path);
NbRegConfig load_nbreg_config(const std::string& path);
SurfaceConfig load_surface_config(const std::string& path);
EntropyTraceConfig load_entropy_config(const std::string& path);

}  // namespace scoring

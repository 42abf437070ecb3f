#ifndef EVIMAP_IO_HPP
#define EVIMAP_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "evimap/cumulative.hpp"
#include "evimap/effects.hpp"
#include "evimap/synthesis.hpp"

namespace evimap {

using nlohmann::json;

inline constexpr std::string_view kToolName = "evimap";
inline constexpr std::string_view kToolVersion = "1.0.0";

/// Raw draws are emitted only when max_draws > 0, thinned evenly to at most
/// that many.
json to_json(const PosteriorSummary& s, std::size_t max_draws = 0);
PosteriorSummary summary_from_json(const json& j);

json to_json(const SynthesisResult& r, std::size_t max_draws = 0);
SynthesisResult synthesis_from_json(const json& j);

json to_json(const Datapoint& d);
Datapoint datapoint_from_json(const json& j);

json to_json(const OutcomeReport& r);
OutcomeReport report_from_json(const json& j);

/// Cell JSON carries its snapshot and, for the run's target indication, the
/// pooled-effect draws thinned to `max_draws`.
json to_json(const CumulativeCell& c, std::size_t max_draws);
CumulativeCell cell_from_json(const json& j);

inline constexpr std::size_t kStoredDraws = 4000;

/// Writes run.json, one cells/<date>_<model>.json per cell and rollup.csv.
void write_cumulative(const CumulativeRun& run, const std::filesystem::path& dir,
                      std::size_t max_draws = kStoredDraws);
CumulativeRun read_cumulative(const std::filesystem::path& dir);
/// Every directory below `root` (itself included) holding a run.json.
std::vector<CumulativeRun> read_cumulative_tree(const std::filesystem::path& root);

/// Table-style roll-up: one row per (timepoint, model).
void write_rollup_csv(std::ostream& out, const CumulativeRun& run);

/// One CSV per monitored quantity with a single "draw" column.
void dump_draws(const SynthesisResult& r, const std::filesystem::path& dir);

void write_metrics_csv(std::ostream& out, const Dataset& ds);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);

struct RunManifest {
  std::string tool{kToolName};
  std::string version{kToolVersion};
  std::string command;
  std::map<std::string, std::string> flags;
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::uint64_t seed = 0;
  std::string timestamp;  // ISO 8601 UTC

  /// Equality ignoring the timestamp.
  bool same_run(const RunManifest& o) const;
};

json to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);
std::string utc_timestamp();
void write_manifest(const RunManifest& m, const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& p, const std::string& text);
std::string read_text_file(const std::filesystem::path& p);

}  // namespace evimap

#endif  // EVIMAP_IO_HPP

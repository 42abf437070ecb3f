#ifndef EVIMAP_CUMULATIVE_HPP
#define EVIMAP_CUMULATIVE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evimap/dataset.hpp"
#include "evimap/synthesis.hpp"

namespace evimap {

/// Which report of a comparison represents it at a given date.
///  FINAL_ONLY - a comparison enters once its final report is out.
///  LATEST_ANY - the latest report of any status.
enum class SnapshotRule { FINAL_ONLY, LATEST_ANY };

std::string_view to_string(SnapshotRule r);
std::optional<SnapshotRule> parse_snapshot_rule(std::string_view s);

struct TimepointPlan {
  Indication indication{};
  Outcome outcome{};
  std::vector<Date> timepoints;  // year-ends, strictly increasing
};

/// One year-end per calendar year in which a report of (indication, outcome)
/// enters the evidence base under `rule`. Throws NoEvidence when there is none.
TimepointPlan plan_timepoints(const Dataset& ds, Indication indication, Outcome outcome,
                              SnapshotRule rule = SnapshotRule::FINAL_ONLY);

struct SnapshotCounts {
  std::size_t total = 0;
  std::map<Indication, std::size_t> per_indication;

  std::size_t of(Indication i) const;
  bool operator==(const SnapshotCounts&) const = default;
};

struct Snapshot {
  Date as_of;
  Outcome outcome{};
  std::optional<Indication> scope;  // nullopt = all indications
  std::vector<OutcomeReport> reports;
  std::vector<Datapoint> datapoints;  // aligned with reports, ordered by comparison
  SnapshotCounts counts;
};

/// Evidence available at `as_of`: at most one report per comparison, the
/// latest one admissible under `rule`.
Snapshot snapshot(const Dataset& ds, Outcome outcome, Date as_of,
                  std::optional<Indication> scope = std::nullopt,
                  SnapshotRule rule = SnapshotRule::FINAL_ONLY);

std::vector<Datapoint> to_datapoints(const Dataset& ds, const std::vector<OutcomeReport>& reports);

struct CumulativeCell {
  std::size_t timepoint_index = 0;
  Date timepoint;
  ModelKind model{};
  std::uint64_t seed = 0;
  Snapshot snapshot;
  std::optional<SynthesisResult> result;
  std::optional<ErrorCode> error_code;
  std::string error;

  bool ok() const { return result.has_value(); }
};

struct CumulativeRun {
  Indication indication{};
  Outcome outcome{};
  SnapshotRule rule{};
  std::vector<Date> timepoints;
  /// Timepoint-major, models in IP, CP, HMA order.
  std::vector<CumulativeCell> cells;

  const CumulativeCell& cell(std::size_t timepoint_index, ModelKind model) const;
};

struct CumulativeOptions {
  SnapshotRule rule = SnapshotRule::FINAL_ONLY;
  std::vector<ModelKind> models{kAllModels.begin(), kAllModels.end()};
  /// Worker threads for cells; 0 picks the hardware concurrency.
  unsigned threads = 0;
  /// Keep only the draws of the target indication's pooled effect.
  bool prune_draws = true;
};

/// Seed of cell (timepoint t, model m), derived from the run seed.
std::uint64_t derive_cell_seed(std::uint64_t seed, std::size_t timepoint_index, ModelKind model);

/// IP cells use the within-indication snapshot, CP and HMA the all-indication
/// one. A failing cell records its error and the rest still run. Output does
/// not depend on the thread count.
CumulativeRun run_cumulative(const Dataset& ds, Outcome outcome, Indication indication,
                             const McmcConfig& cfg, const CumulativeOptions& opts = {});

}  // namespace evimap

#endif  // EVIMAP_CUMULATIVE_HPP

#ifndef EVIMAP_VIZ_PLOTS_HPP
#define EVIMAP_VIZ_PLOTS_HPP

#include <optional>
#include <string_view>
#include <vector>

#include "evimap/cumulative.hpp"
#include "evimap/dataset.hpp"
#include "evimap/viz/plot_spec.hpp"

namespace evimap::viz {

/// UNCERTAINTY bins on CI width; UNCERTAINTY_REL on SE / |ln HR|.
enum class TimelineVariant { PLAIN, SIZE, UNCERTAINTY, UNCERTAINTY_REL, MATURITY_OS, MATURITY_PFS };
enum class RidgelineOrder { BY_YEAR, BY_EFFECT };
enum class SynthMode { IP_VS_STUDY, MODEL_COMPARE };

std::string_view to_string(TimelineVariant v);
std::optional<TimelineVariant> parse_timeline_variant(std::string_view s);
std::string_view to_string(RidgelineOrder o);
std::optional<RidgelineOrder> parse_ridgeline_order(std::string_view s);
std::string_view to_string(SynthMode m);
std::optional<SynthMode> parse_synth_mode(std::string_view s);

/// Reporting points of one comparison closer than this are pushed apart.
inline constexpr int kOverlapDays = 61;

struct TimelineOptions {
  double r0 = 3.0;
};

/// Indications ordered by the earliest start date among their trials.
std::vector<Indication> chronological_indications(const Dataset& ds);

/// Display x (decimal year) of each distinct reporting date of a comparison,
/// after applying the 2-month separation. Input dates need not be sorted or
/// unique; the result maps each distinct date in ascending order.
std::vector<std::pair<Date, double>> display_positions(std::vector<Date> dates);

PlotSpec build_timeline(const Dataset& ds, TimelineVariant variant, const TimelineOptions& opts = {});

PlotSpec build_ridgeline(const Dataset& ds, RidgelineOrder order);

/// Needs raw draws of the target indication's pooled effect in every cell used.
PlotSpec build_synth_ridgeline(const CumulativeRun& run, SynthMode mode);

struct ViolinInput {
  Indication indication{};
  ModelKind model{};
  Vector os;   // posterior draws of d_j, OS
  Vector pfs;  // posterior draws of d_j, PFS
};

/// Final-timepoint pooled-effect draws from a pair of cumulative runs (OS and
/// PFS) of one indication.
std::vector<ViolinInput> violin_inputs(const CumulativeRun& os, const CumulativeRun& pfs);

/// One panel per indication (in input order of first appearance), three split
/// violins per panel. Throws MissingDraws when any side lacks draws.
PlotSpec build_split_violin(const std::vector<ViolinInput>& inputs);

}  // namespace evimap::viz

#endif  // EVIMAP_VIZ_PLOTS_HPP

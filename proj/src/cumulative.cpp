#include "evimap/cumulative.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <set>
#include <thread>

#include "evimap/effects.hpp"

namespace evimap {

std::string_view to_string(SnapshotRule r) {
  return r == SnapshotRule::FINAL_ONLY ? "FINAL_ONLY" : "LATEST_ANY";
}

std::optional<SnapshotRule> parse_snapshot_rule(std::string_view s) {
  std::string up(s);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::replace(up.begin(), up.end(), '-', '_');
  if (up == "FINAL_ONLY" || up == "FINAL") return SnapshotRule::FINAL_ONLY;
  if (up == "LATEST_ANY" || up == "LATEST") return SnapshotRule::LATEST_ANY;
  return std::nullopt;
}

namespace {

bool admissible(const OutcomeReport& r, SnapshotRule rule) {
  return rule == SnapshotRule::LATEST_ANY || r.is_final;
}

}  // namespace

TimepointPlan plan_timepoints(const Dataset& ds, Indication indication, Outcome outcome,
                              SnapshotRule rule) {
  std::set<int> years;
  for (const auto& r : reports_for(ds, indication, outcome))
    if (admissible(r, rule)) years.insert(r.cutoff_date.year());
  if (years.empty())
    throw Error(ErrorCode::NoEvidence, "no " + std::string(to_string(outcome)) + " reports for " +
                                           std::string(to_string(indication)));
  TimepointPlan plan{indication, outcome, {}};
  for (int y : years) plan.timepoints.push_back(Date::year_end(y));
  return plan;
}

std::size_t SnapshotCounts::of(Indication i) const {
  const auto it = per_indication.find(i);
  return it == per_indication.end() ? 0 : it->second;
}

std::vector<Datapoint> to_datapoints(const Dataset& ds, const std::vector<OutcomeReport>& reports) {
  std::vector<Datapoint> out;
  out.reserve(reports.size());
  for (const auto& r : reports) {
    const auto e = effect_of(r);
    out.push_back({e.ln_hr, e.se, ds.trial_of(r).indication, r.key.label()});
  }
  return out;
}

Snapshot snapshot(const Dataset& ds, Outcome outcome, Date as_of, std::optional<Indication> scope,
                  SnapshotRule rule) {
  std::map<ComparisonKey, const OutcomeReport*> latest;
  for (const auto& r : ds.reports()) {
    if (r.outcome != outcome || r.cutoff_date > as_of || !admissible(r, rule)) continue;
    if (scope && ds.trial_of(r).indication != *scope) continue;
    auto& slot = latest[r.key];
    if (!slot || slot->cutoff_date < r.cutoff_date) slot = &r;
  }
  Snapshot s;
  s.as_of = as_of;
  s.outcome = outcome;
  s.scope = scope;
  for (const auto& [key, r] : latest) s.reports.push_back(*r);
  s.datapoints = to_datapoints(ds, s.reports);
  s.counts.total = s.datapoints.size();
  for (const auto& d : s.datapoints) ++s.counts.per_indication[d.indication];
  return s;
}

const CumulativeCell& CumulativeRun::cell(std::size_t timepoint_index, ModelKind model) const {
  for (const auto& c : cells)
    if (c.timepoint_index == timepoint_index && c.model == model) return c;
  throw Error(ErrorCode::InvalidArgument, "no such cumulative cell");
}

std::uint64_t derive_cell_seed(std::uint64_t seed, std::size_t timepoint_index, ModelKind model) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(timepoint_index),
                    static_cast<std::uint32_t>(model)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

void prune(SynthesisResult& r, Indication keep) {
  auto clear = [](PosteriorSummary& s) { s.draws.resize(0); };
  for (auto& [ind, s] : r.pooled_effect)
    if (ind != keep) clear(s);
  for (auto& [ind, s] : r.within_sd) clear(s);
  for (auto& [label, s] : r.study_effects) clear(s);
  if (r.between_sd) clear(*r.between_sd);
  if (r.overall_mean) clear(*r.overall_mean);
}

}  // namespace

CumulativeRun run_cumulative(const Dataset& ds, Outcome outcome, Indication indication,
                             const McmcConfig& cfg, const CumulativeOptions& opts) {
  const auto plan = plan_timepoints(ds, indication, outcome, opts.rule);
  CumulativeRun run;
  run.indication = indication;
  run.outcome = outcome;
  run.rule = opts.rule;
  run.timepoints = plan.timepoints;

  for (std::size_t t = 0; t < plan.timepoints.size(); ++t) {
    const Date tp = plan.timepoints[t];
    const auto within = snapshot(ds, outcome, tp, indication, opts.rule);
    const auto all = snapshot(ds, outcome, tp, std::nullopt, opts.rule);
    for (auto m : opts.models) {
      CumulativeCell c;
      c.timepoint_index = t;
      c.timepoint = tp;
      c.model = m;
      c.seed = derive_cell_seed(cfg.seed, t, m);
      c.snapshot = m == ModelKind::IP ? within : all;
      run.cells.push_back(std::move(c));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < run.cells.size(); i = next++) {
      auto& c = run.cells[i];
      McmcConfig local = cfg;
      local.seed = c.seed;
      local.parallel_chains = false;
      local.keep_study_draws = !opts.prune_draws;
      try {
        if (c.snapshot.counts.of(indication) == 0)
          throw Error(ErrorCode::EmptyIndication,
                      std::string(to_string(indication)) + " has no datapoints at " + c.timepoint.iso());
        ModelSpec spec;
        spec.model = c.model;
        c.result = run_synthesis(c.snapshot.datapoints, spec, local);
        if (opts.prune_draws) prune(*c.result, indication);
      } catch (const Error& e) {
        c.error_code = e.code();
        c.error = e.what();
      } catch (const std::exception& e) {
        c.error_code = ErrorCode::InvalidArgument;
        c.error = e.what();
      }
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(run.cells.size()));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return run;
}

}  // namespace evimap

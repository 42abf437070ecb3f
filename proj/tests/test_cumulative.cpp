#include <doctest.h>

#include <set>

#include "evimap/cumulative.hpp"
#include "fixture.hpp"

using namespace evimap;
using evimap::testing::fixture;

namespace {

McmcConfig quick(std::uint64_t seed) {
  McmcConfig c;
  c.chains = 2;
  c.burn_in = 200;
  c.samples_per_chain = 600;
  c.seed = seed;
  return c;
}

std::set<std::string> labels(const Snapshot& s) {
  std::set<std::string> out;
  for (const auto& d : s.datapoints) out.insert(d.label);
  return out;
}

}  // namespace

TEST_CASE("snapshot rule names") {
  CHECK(parse_snapshot_rule("final-only") == SnapshotRule::FINAL_ONLY);
  CHECK(parse_snapshot_rule("latest") == SnapshotRule::LATEST_ANY);
  CHECK(parse_snapshot_rule("LATEST_ANY") == SnapshotRule::LATEST_ANY);
  CHECK_FALSE(parse_snapshot_rule("first").has_value());
}

TEST_CASE("timepoint plans") {
  const auto cer = plan_timepoints(fixture(), Indication::CER, Outcome::OS);
  REQUIRE(cer.timepoints.size() == 1);
  CHECK(cer.timepoints[0] == Date(2014, 12, 31));
  for (auto ind : kAllIndications)
    for (auto out : kAllOutcomes) {
      const auto p = plan_timepoints(fixture(), ind, out);
      CHECK(!p.timepoints.empty());
      CHECK(std::is_sorted(p.timepoints.begin(), p.timepoints.end()));
      for (const auto& d : p.timepoints) CHECK((d.month() == 12 && d.day() == 31));
    }
}

TEST_CASE("no evidence for an indication") {
  const Dataset ds = Dataset::build({{{"T1", std::nullopt}, Indication::COL, Date(2000, 1, 1), std::nullopt,
                                      ComparatorClass::CHM, 10, 10}},
                                    {});
  try {
    plan_timepoints(ds, Indication::COL, Outcome::OS);
    FAIL("expected NoEvidence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoEvidence);
  }
}

TEST_CASE("snapshot counts of reference timepoints") {
  const auto os09 = snapshot(fixture(), Outcome::OS, Date(2009, 12, 31));
  CHECK(os09.counts.total == 16);
  CHECK(os09.counts.of(Indication::COL) == 6);
  const auto pfs14 = snapshot(fixture(), Outcome::PFS, Date(2014, 12, 31));
  CHECK(pfs14.counts.total == 37);
  const auto oftpp = snapshot(fixture(), Outcome::OS, Date(2013, 12, 31), Indication::OFTPP);
  CHECK(oftpp.counts.total == 3);
}

TEST_CASE("snapshots grow with time, hold one report per comparison and nest") {
  const Dataset& ds = fixture();
  for (auto out : kAllOutcomes)
    for (auto rule : {SnapshotRule::FINAL_ONLY, SnapshotRule::LATEST_ANY}) {
      std::set<std::string> prev;
      for (int y = 1999; y <= 2020; ++y) {
        const Date d = Date::year_end(y);
        const auto all = snapshot(ds, out, d, std::nullopt, rule);
        const auto now = labels(all);
        CHECK(now.size() == all.datapoints.size());
        CHECK(std::includes(now.begin(), now.end(), prev.begin(), prev.end()));
        for (const auto& r : all.reports) {
          CHECK(r.cutoff_date <= d);
          if (rule == SnapshotRule::FINAL_ONLY) CHECK(r.is_final);
        }
        std::size_t sum = 0;
        for (auto ind : kAllIndications) {
          const auto within = snapshot(ds, out, d, ind, rule);
          const auto wl = labels(within);
          CHECK(std::includes(now.begin(), now.end(), wl.begin(), wl.end()));
          CHECK(within.counts.total == all.counts.of(ind));
          sum += within.counts.total;
        }
        CHECK(sum == all.counts.total);
        if (rule == SnapshotRule::LATEST_ANY)
          CHECK(all.counts.total >= snapshot(ds, out, d).counts.total);
        prev = now;
      }
    }
}

TEST_CASE("cell seeds are distinct and reproducible") {
  std::set<std::uint64_t> seen;
  for (std::size_t t = 0; t < 20; ++t)
    for (auto m : kAllModels) {
      const auto s = derive_cell_seed(7, t, m);
      CHECK(s == derive_cell_seed(7, t, m));
      seen.insert(s);
    }
  CHECK(seen.size() == 60);
  CHECK(derive_cell_seed(7, 0, ModelKind::IP) != derive_cell_seed(8, 0, ModelKind::IP));
}

TEST_CASE("cumulative run layout, pruning and thread independence") {
  CumulativeOptions one;
  one.threads = 1;
  CumulativeOptions many;
  many.threads = 4;
  const auto a = run_cumulative(fixture(), Outcome::OS, Indication::GLIO, quick(3), one);
  const auto b = run_cumulative(fixture(), Outcome::OS, Indication::GLIO, quick(3), many);
  REQUIRE(a.timepoints.size() == 3);
  REQUIRE(a.cells.size() == 9);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const auto& c = a.cells[i];
    CHECK(c.timepoint_index == i / 3);
    CHECK(c.model == kAllModels[i % 3]);
    REQUIRE(c.ok());
    REQUIRE(b.cells[i].ok());
    const auto& r = *c.result;
    CHECK(r.pooled_effect.at(Indication::GLIO).draws == b.cells[i].result->pooled_effect.at(Indication::GLIO).draws);
    CHECK(r.pooled_effect.at(Indication::GLIO).has_draws());
    for (const auto& [ind, s] : r.pooled_effect)
      if (ind != Indication::GLIO) CHECK_FALSE(s.has_draws());
    for (const auto& [label, s] : r.study_effects) CHECK_FALSE(s.has_draws());
    if (c.model == ModelKind::IP)
      CHECK(c.snapshot.counts.total == c.snapshot.counts.of(Indication::GLIO));
    else
      CHECK(c.snapshot.counts.total >= c.snapshot.counts.of(Indication::GLIO));
  }
  CHECK(a.cell(2, ModelKind::HMA).snapshot.counts.total == 32);
  CHECK_THROWS_AS(a.cell(9, ModelKind::IP), Error);
}

TEST_CASE("a model subset runs only the requested cells") {
  CumulativeOptions opts;
  opts.models = {ModelKind::CP};
  opts.prune_draws = false;
  const auto r = run_cumulative(fixture(), Outcome::PFS, Indication::CER, quick(1), opts);
  REQUIRE(r.cells.size() == 1);
  CHECK(r.cells[0].model == ModelKind::CP);
  REQUIRE(r.cells[0].ok());
  CHECK(r.cells[0].result->study_effects.begin()->second.has_draws());
}

#include <doctest.h>

#include <filesystem>
#include <regex>
#include <sstream>

#include "evimap/csv.hpp"
#include "evimap/io.hpp"
#include "fixture.hpp"

using namespace evimap;
using evimap::testing::fixture;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("evimap_test_io_" + name);
  fs::remove_all(p);
  return p;
}

McmcConfig quick() {
  McmcConfig c;
  c.chains = 2;
  c.burn_in = 200;
  c.samples_per_chain = 3000;
  c.seed = 21;
  return c;
}

void check_summary(const PosteriorSummary& a, const PosteriorSummary& b) {
  CHECK(a.median == b.median);
  CHECK(a.lower95 == b.lower95);
  CHECK(a.upper95 == b.upper95);
}

}  // namespace

TEST_CASE("sha256 known digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("summary json keeps quantiles exactly and thins draws evenly") {
  Vector d(10);
  for (int i = 0; i < 10; ++i) d(i) = 0.1 * i + 1e-13;
  const auto s = summarize(d);
  const auto j = to_json(s, 4);
  const auto back = summary_from_json(json::parse(j.dump()));
  check_summary(s, back);
  REQUIRE(back.draws.size() == 4);
  CHECK(back.draws(0) == d(0));
  CHECK(back.draws(1) == d(2));
  CHECK(back.draws(2) == d(5));
  CHECK(back.draws(3) == d(7));
  CHECK_FALSE(to_json(s).contains("draws"));
  CHECK(summary_from_json(to_json(s, 100)).draws == d);
}

TEST_CASE("synthesis result json round-trip") {
  const auto snap = snapshot(fixture(), Outcome::PFS, Date(2008, 12, 31));
  ModelSpec spec;
  spec.model = ModelKind::HMA;
  const auto r = run_synthesis(snap.datapoints, spec, quick());
  const auto back = synthesis_from_json(json::parse(to_json(r).dump()));
  CHECK(back.model == r.model);
  CHECK(back.n_datapoints == r.n_datapoints);
  CHECK(back.fit.dic == r.fit.dic);
  CHECK(back.fit.pd == r.fit.pd);
  CHECK(back.rhat == r.rhat);
  CHECK(back.converged == r.converged);
  REQUIRE(back.between_sd.has_value());
  check_summary(*back.between_sd, *r.between_sd);
  REQUIRE(back.pooled_effect.size() == r.pooled_effect.size());
  for (const auto& [ind, s] : r.pooled_effect) check_summary(back.pooled_effect.at(ind), s);
  for (const auto& [label, s] : r.study_effects) check_summary(back.study_effects.at(label), s);
}

TEST_CASE("report and datapoint json round-trip") {
  for (const auto& r : fixture().reports()) CHECK(report_from_json(json::parse(to_json(r).dump())) == r);
  const Datapoint d{-0.25, 0.125, Indication::OFTPP, "GOG-0218"};
  const auto back = datapoint_from_json(to_json(d));
  CHECK(back.y == d.y);
  CHECK(back.sigma == d.sigma);
  CHECK(back.indication == d.indication);
  CHECK(back.label == d.label);
}

TEST_CASE("cumulative output round-trip and tree discovery") {
  const auto run = run_cumulative(fixture(), Outcome::OS, Indication::CER, quick());
  const fs::path root = scratch("cum");
  write_cumulative(run, root / "CER", 1000);
  CHECK(fs::exists(root / "CER" / "rollup.csv"));
  CHECK(fs::exists(root / "CER" / "cells" / "2014-12-31_HMA.json"));
  const auto back = read_cumulative(root / "CER");
  CHECK(back.indication == run.indication);
  CHECK(back.outcome == run.outcome);
  CHECK(back.timepoints == run.timepoints);
  REQUIRE(back.cells.size() == run.cells.size());
  for (std::size_t i = 0; i < run.cells.size(); ++i) {
    const auto& a = run.cells[i];
    const auto& b = back.cells[i];
    CHECK(a.seed == b.seed);
    CHECK(a.snapshot.counts == b.snapshot.counts);
    CHECK(a.snapshot.reports == b.snapshot.reports);
    REQUIRE(b.ok());
    const auto& pa = a.result->pooled_effect.at(Indication::CER);
    const auto& pb = b.result->pooled_effect.at(Indication::CER);
    check_summary(pa, pb);
    CHECK(pb.draws.size() == 1000);
  }
  const auto tree = read_cumulative_tree(root);
  REQUIRE(tree.size() == 1);
  CHECK(tree[0].indication == Indication::CER);

  std::istringstream roll(read_text_file(root / "CER" / "rollup.csv"));
  const auto rows = csv::read(roll);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == "timepoint");
  CHECK(rows[0].size() == 21);
  CHECK(rows[3][1] == "HMA");
  CHECK(!rows[3][12].empty());
  CHECK(rows[1][12].empty());
  fs::remove_all(root);
}

TEST_CASE("failed cells keep their error through json") {
  CumulativeCell c;
  c.timepoint = Date(2010, 12, 31);
  c.model = ModelKind::CP;
  c.snapshot.as_of = c.timepoint;
  c.error_code = ErrorCode::EmptyIndication;
  c.error = "EmptyIndication: nothing";
  const auto back = cell_from_json(json::parse(to_json(c, 10).dump()));
  CHECK_FALSE(back.ok());
  CHECK(back.error_code == ErrorCode::EmptyIndication);
  CHECK(back.error == c.error);
}

TEST_CASE("draw dumps hold one column per parameter") {
  const auto snap = snapshot(fixture(), Outcome::OS, Date(2012, 12, 31));
  ModelSpec spec;
  spec.model = ModelKind::CP;
  auto cfg = quick();
  cfg.samples_per_chain = 50;
  const auto r = run_synthesis(snap.datapoints, spec, cfg);
  const fs::path dir = scratch("draws");
  dump_draws(r, dir);
  const auto rows = csv::read_file((dir / "d.csv").string());
  REQUIRE(rows.size() == 101);
  CHECK(rows[0] == csv::Row{"draw"});
  CHECK(std::stod(rows[1][0]) == r.pooled_effect.begin()->second.draws(0));
  CHECK(fs::exists(dir / "tau_COL.csv"));
  fs::remove_all(dir);
}

TEST_CASE("metrics csv covers every report") {
  std::ostringstream out;
  write_metrics_csv(out, fixture());
  std::istringstream in(out.str());
  const auto rows = csv::read(in);
  REQUIRE(rows.size() == fixture().reports().size() + 1);
  CHECK(rows[0].size() == 19);
  for (const auto& r : rows) CHECK(r.size() == 19);
}

TEST_CASE("run manifest") {
  RunManifest m;
  m.command = "synth";
  m.flags = {{"model", "HMA"}};
  m.input_digests = {{"trials.csv", sha256_hex("x")}};
  m.seed = 99;
  m.timestamp = utc_timestamp();
  CHECK(std::regex_match(m.timestamp, std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));
  const fs::path dir = scratch("manifest");
  write_manifest(m, dir);
  const auto back = manifest_from_json(json::parse(read_text_file(dir / "manifest.json")));
  CHECK(back.same_run(m));
  CHECK(back.tool == "evimap");
  RunManifest other = back;
  other.timestamp = "1999-01-01T00:00:00Z";
  CHECK(other.same_run(m));
  other.seed = 1;
  CHECK_FALSE(other.same_run(m));
  fs::remove_all(dir);
}

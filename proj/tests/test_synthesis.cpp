#include <doctest.h>

#include <cmath>

#include "evimap/cumulative.hpp"
#include "evimap/synthesis.hpp"
#include "fixture.hpp"

using namespace evimap;
using evimap::testing::fixture;

namespace {

McmcConfig small(std::uint64_t seed, int samples = 4000) {
  McmcConfig c;
  c.chains = 2;
  c.burn_in = 1000;
  c.samples_per_chain = samples;
  c.seed = seed;
  return c;
}

std::vector<Datapoint> col_os_2009() {
  return snapshot(fixture(), Outcome::OS, Date(2009, 12, 31), Indication::COL).datapoints;
}

/// Two indications with clearly different effects.
std::vector<Datapoint> two_indications() {
  return {{-0.40, 0.12, Indication::COL, "a"}, {-0.30, 0.15, Indication::COL, "b"},
          {-0.35, 0.10, Indication::COL, "c"}, {0.05, 0.20, Indication::BRE, "d"},
          {-0.10, 0.18, Indication::BRE, "e"}, {-0.20, 0.25, Indication::NSCLC, "f"}};
}

bool same_draws(const SynthesisResult& a, const SynthesisResult& b) {
  if (a.pooled_effect.size() != b.pooled_effect.size()) return false;
  for (const auto& [ind, s] : a.pooled_effect)
    if (!(s.draws == b.pooled_effect.at(ind).draws)) return false;
  for (const auto& [ind, s] : a.within_sd)
    if (!(s.draws == b.within_sd.at(ind).draws)) return false;
  return a.fit.dic == b.fit.dic && a.rhat == b.rhat;
}

}  // namespace

TEST_CASE("model names") {
  CHECK(parse_model("hma") == ModelKind::HMA);
  CHECK(parse_model("Cp") == ModelKind::CP);
  CHECK_FALSE(parse_model("FE").has_value());
  for (auto m : kAllModels) CHECK(parse_model(to_string(m)) == m);
}

TEST_CASE("configuration validation") {
  ModelSpec s;
  s.prior_tau_scale = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.fixed_tau = -1.0;
  CHECK_THROWS_AS(s.validate(), Error);
  McmcConfig c;
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.samples_per_chain = 10;
  c.thin = 3;
  CHECK(c.retained_per_chain() == 3);
  CHECK(c.total_retained() == 9);
}

TEST_CASE("input errors") {
  const std::vector<Datapoint> none;
  try {
    run_synthesis(none, {}, small(1));
    FAIL("expected EmptyIndication");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyIndication);
  }
  const std::vector<Datapoint> dup{{0.1, 0.2, Indication::COL, "x"}, {0.2, 0.2, Indication::COL, "x"}};
  CHECK_THROWS_AS(run_synthesis(dup, {}, small(1)), Error);
  const std::vector<Datapoint> bad{{0.1, 0.0, Indication::COL, "x"}};
  CHECK_THROWS_AS(run_synthesis(bad, {}, small(1)), Error);
}

TEST_CASE("result shape per model") {
  const auto data = two_indications();
  for (auto m : kAllModels) {
    ModelSpec spec;
    spec.model = m;
    const auto r = run_synthesis(data, spec, small(3, 1000));
    CHECK(r.model == m);
    CHECK(r.n_datapoints == data.size());
    CHECK(r.pooled_effect.size() == 3);
    CHECK(r.within_sd.size() == 3);
    CHECK(r.study_effects.size() == data.size());
    CHECK(r.between_sd.has_value() == (m == ModelKind::HMA));
    CHECK(r.overall_mean.has_value() == (m == ModelKind::HMA));
    CHECK(r.fit.dic == r.fit.dbar + r.fit.pd);
    CHECK(r.pooled_effect.at(Indication::COL).draws.size() == 2000);
    CHECK(r.rhat.count("tau[COL]") == 1);
    CHECK(r.rhat.count(m == ModelKind::CP ? "d" : "d[COL]") == 1);
    CHECK(r.rhat.count("tau_d") == (m == ModelKind::HMA ? 1u : 0u));
    if (m == ModelKind::CP)
      CHECK(r.pooled_effect.at(Indication::COL).draws == r.pooled_effect.at(Indication::BRE).draws);
    for (const auto& [ind, s] : r.within_sd) CHECK(s.draws.minCoeff() > 0.0);
  }
}

TEST_CASE("study draws can be dropped") {
  auto cfg = small(3, 500);
  cfg.keep_study_draws = false;
  const auto r = run_synthesis(two_indications(), {}, cfg);
  for (const auto& [label, s] : r.study_effects) {
    CHECK_FALSE(s.has_draws());
    CHECK(s.lower95 <= s.median);
  }
}

TEST_CASE("determinism: repeat runs and serial versus parallel chains are bitwise identical") {
  const auto data = two_indications();
  ModelSpec spec;
  spec.model = ModelKind::HMA;
  auto cfg = small(42, 1500);
  cfg.chains = 3;
  const auto a = run_synthesis(data, spec, cfg);
  const auto b = run_synthesis(data, spec, cfg);
  cfg.parallel_chains = false;
  const auto c = run_synthesis(data, spec, cfg);
  CHECK(same_draws(a, b));
  CHECK(same_draws(a, c));
  cfg.seed = 43;
  CHECK_FALSE(same_draws(a, run_synthesis(data, spec, cfg)));
}

TEST_CASE("conjugate oracle with pinned heterogeneity over 20 seeds") {
  const auto data = col_os_2009();
  REQUIRE(data.size() >= 3);
  ModelSpec spec;
  spec.fixed_tau = 0.1;
  const auto exact = conjugate_pooled_posterior(data, 0.1, spec.prior_effect_variance);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = run_synthesis(data, spec, small(seed, 5000));
    const Vector& d = r.pooled_effect.at(Indication::COL).draws;
    const double mean = d.mean();
    const double mcse = mcse_mean(d);
    const double sd = sample_sd(d);
    const Vector sq = (d.array() - mean).square().matrix();
    const double mcse_sd = mcse_mean(sq) / (2.0 * sd);
    INFO("seed " << seed);
    CHECK(std::abs(mean - exact.mean) <= 3.0 * mcse);
    CHECK(std::abs(sd - exact.sd) <= 3.0 * mcse_sd);
    CHECK(r.within_sd.at(Indication::COL).median == 0.1);
    CHECK(r.rhat.count("tau[COL]") == 0);
  }
}

TEST_CASE("prior recovery with uninformative data") {
  std::vector<Datapoint> data;
  for (int i = 0; i < 4; ++i) data.push_back({0.0, 1e6, Indication::REN, "s" + std::to_string(i)});
  auto cfg = small(8, 20000);
  cfg.chains = 3;
  const auto r = run_synthesis(data, {}, cfg);
  CHECK(std::abs(r.within_sd.at(Indication::REN).median - 0.337244875098) <= 0.02);
}

TEST_CASE("IP and CP coincide when one indication is present") {
  const auto data = col_os_2009();
  ModelSpec ip, cp;
  cp.model = ModelKind::CP;
  auto cfg = small(5, 20000);
  const auto a = run_synthesis(data, ip, cfg);
  cfg.seed = 6;
  const auto b = run_synthesis(data, cp, cfg);
  const Vector& da = a.pooled_effect.at(Indication::COL).draws;
  const Vector& db = b.pooled_effect.at(Indication::COL).draws;
  const double tol = 3.0 * std::hypot(mcse_mean(da), mcse_mean(db));
  CHECK(std::abs(da.mean() - db.mean()) <= tol);
  CHECK(std::abs(sample_sd(da) / sample_sd(db) - 1.0) <= 0.05);
}

TEST_CASE("borrowing shrinks the posterior: CP <= HMA <= IP") {
  const auto data = two_indications();
  auto cfg = small(17, 10000);
  cfg.chains = 3;
  std::map<ModelKind, double> sd;
  for (auto m : kAllModels) {
    ModelSpec spec;
    spec.model = m;
    sd[m] = run_synthesis(data, spec, cfg).pooled_effect.at(Indication::BRE).sd();
  }
  CHECK(sd[ModelKind::CP] <= sd[ModelKind::HMA]);
  CHECK(sd[ModelKind::HMA] <= sd[ModelKind::IP]);
}

TEST_CASE("default budget converges on a fixture snapshot") {
  McmcConfig cfg;
  cfg.seed = 1;
  const auto s = snapshot(fixture(), Outcome::OS, Date(2019, 12, 31));
  ModelSpec spec;
  spec.model = ModelKind::HMA;
  const auto r = run_synthesis(s.datapoints, spec, cfg);
  CHECK(r.converged);
  CHECK(r.max_rhat() < kRhatThreshold);
}

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "evimap/cumulative.hpp"
#include "evimap/dataset.hpp"
#include "evimap/io.hpp"
#include "evimap/synthesis.hpp"
#include "evimap/viz/plots.hpp"
#include "evimap/viz/svg.hpp"

#ifndef EVIMAP_DEFAULT_DATA_DIR
#define EVIMAP_DEFAULT_DATA_DIR "data/fixture"
#endif

namespace fs = std::filesystem;
using namespace evimap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Inputs {
  std::string trials = std::string(EVIMAP_DEFAULT_DATA_DIR) + "/trials.csv";
  std::string outcomes = std::string(EVIMAP_DEFAULT_DATA_DIR) + "/outcomes.csv";

  void add(CLI::App* sub) {
    sub->add_option("--trials", trials, "Trials CSV")->capture_default_str();
    sub->add_option("--outcomes", outcomes, "Outcome reports CSV")->capture_default_str();
  }
  Dataset load() const { return load_dataset(trials, outcomes); }
  std::map<std::string, std::string> digests() const {
    return {{trials, sha256_file(trials)}, {outcomes, sha256_file(outcomes)}};
  }
};

struct Mcmc {
  std::optional<std::uint64_t> seed;
  int chains = 3;
  int burn_in = 10000;
  int samples = 20000;
  int thin = 1;

  void add(CLI::App* sub) {
    sub->add_option("--seed", seed, "RNG seed (falls back to $EVIMAP_SEED, then 1)");
    sub->add_option("--chains", chains, "MCMC chains")->check(CLI::Range(2, 64))->capture_default_str();
    sub->add_option("--burn-in", burn_in, "Burn-in iterations per chain")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--samples", samples, "Retained iterations per chain")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--thin", thin, "Thinning interval")->check(CLI::PositiveNumber)->capture_default_str();
  }
  std::uint64_t resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("EVIMAP_SEED")) {
      std::uint64_t v = 0;
      std::istringstream in(env);
      if (!(in >> v) || !in.eof()) throw UsageError("EVIMAP_SEED is not an unsigned integer: " + std::string(env));
      return v;
    }
    return 1;
  }
  McmcConfig config() const {
    McmcConfig c;
    c.chains = chains;
    c.burn_in = burn_in;
    c.samples_per_chain = samples;
    c.thin = thin;
    c.seed = resolved_seed();
    return c;
  }
  void record(std::map<std::string, std::string>& flags) const {
    flags["chains"] = std::to_string(chains);
    flags["burn-in"] = std::to_string(burn_in);
    flags["samples"] = std::to_string(samples);
    flags["thin"] = std::to_string(thin);
  }
};

Outcome need_outcome(const std::string& s) {
  const auto o = parse_outcome(s);
  if (!o) throw UsageError("unknown outcome '" + s + "' (expected os or pfs)");
  return *o;
}

Indication need_indication(const std::string& s) {
  const auto i = parse_indication(s);
  if (!i) throw UsageError("unknown indication '" + s + "'");
  return *i;
}

SnapshotRule need_rule(const std::string& s) {
  const auto r = parse_snapshot_rule(s);
  if (!r) throw UsageError("unknown snapshot rule '" + s + "' (expected final-only or latest-any)");
  return *r;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

void manifest_for(const std::string& command, const Inputs& in, std::map<std::string, std::string> flags,
                  std::uint64_t seed, const fs::path& dir) {
  RunManifest m;
  m.command = command;
  m.flags = std::move(flags);
  m.input_digests = in.digests();
  m.seed = seed;
  m.timestamp = utc_timestamp();
  write_manifest(m, dir);
}

fs::path dir_of(const std::string& out_file) {
  const fs::path p(out_file);
  return p.has_parent_path() ? p.parent_path() : fs::path(".");
}

std::vector<Indication> indications_arg(const std::string& s, const Dataset& ds) {
  if (s.empty() || s == "all" || s == "ALL") return viz::chronological_indications(ds);
  return {need_indication(s)};
}

std::vector<Outcome> outcomes_arg(const std::string& s) {
  if (s == "all" || s == "ALL") return {kAllOutcomes.begin(), kAllOutcomes.end()};
  return {need_outcome(s)};
}

std::string run_dir_name(Outcome o, Indication i) {
  return std::string(to_string(o)) + "_" + std::string(to_string(i));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidence maps and cross-indication Bayesian synthesis for multi-indication trials"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // validate
  Inputs v_in;
  auto* validate = app.add_subcommand("validate", "Check the trials/outcomes CSVs against every schema rule");
  v_in.add(validate);

  // metrics
  Inputs m_in;
  std::string m_out;
  auto* metrics = app.add_subcommand("metrics", "Per-report effect, uncertainty and maturity metrics as CSV");
  m_in.add(metrics);
  metrics->add_option("--out", m_out, "Output CSV (stdout when omitted)");

  // synth
  Inputs s_in;
  Mcmc s_mcmc;
  std::string s_model = "ip", s_outcome = "os", s_as_of, s_indication, s_out, s_dump, s_rule = "final-only";
  auto* synth = app.add_subcommand("synth", "Run one IP/CP/HMA synthesis on a snapshot");
  s_in.add(synth);
  s_mcmc.add(synth);
  synth->add_option("--model", s_model, "ip | cp | hma")->capture_default_str();
  synth->add_option("--outcome", s_outcome, "os | pfs")->capture_default_str();
  synth->add_option("--as-of", s_as_of, "Evidence cut-off date YYYY-MM-DD (default: all evidence)");
  synth->add_option("--indication", s_indication, "Restrict the snapshot to one indication");
  synth->add_option("--rule", s_rule, "Snapshot rule: final-only | latest-any")->capture_default_str();
  synth->add_option("--out", s_out, "Output JSON (stdout when omitted)");
  synth->add_option("--dump-draws", s_dump, "Directory for one CSV of draws per parameter");

  // cumulative
  Inputs c_in;
  Mcmc c_mcmc;
  std::string c_outcome = "os", c_indication = "all", c_out, c_rule = "final-only";
  unsigned c_threads = 0;
  auto* cumulative = app.add_subcommand("cumulative", "Cumulative meta-analysis over year-end timepoints");
  c_in.add(cumulative);
  c_mcmc.add(cumulative);
  cumulative->add_option("--outcome", c_outcome, "os | pfs | all")->capture_default_str();
  cumulative->add_option("--indication", c_indication, "Target indication or all")->capture_default_str();
  cumulative->add_option("--rule", c_rule, "Snapshot rule: final-only | latest-any")->capture_default_str();
  cumulative->add_option("--threads", c_threads, "Worker threads (0 = hardware)");
  cumulative->add_option("--out", c_out, "Output directory")->required();

  // plot
  Inputs p_in;
  Mcmc p_mcmc;
  std::string p_kind, p_variant = "plain", p_order = "by-year", p_mode = "model-compare", p_outcome = "os",
                      p_indication, p_from, p_out;
  auto* plot = app.add_subcommand("plot", "Render an evidence map or synthesis figure as SVG");
  p_in.add(plot);
  p_mcmc.add(plot);
  plot->add_option("--kind", p_kind, "timeline | ridgeline | synth-ridgeline | violin")
      ->required()
      ->check(CLI::IsMember({"timeline", "ridgeline", "synth-ridgeline", "violin"}));
  plot->add_option("--variant", p_variant,
                   "Timeline variant: plain | size | uncertainty | uncertainty-rel | maturity-os | maturity-pfs")
      ->capture_default_str();
  plot->add_option("--order", p_order, "Ridgeline order: by-year | by-effect")->capture_default_str();
  plot->add_option("--mode", p_mode, "Synthesis ridgeline mode: ip-vs-study | model-compare")->capture_default_str();
  plot->add_option("--outcome", p_outcome, "os | pfs (synth-ridgeline)")->capture_default_str();
  plot->add_option("--indication", p_indication, "Indication (synth-ridgeline; violin default all)");
  plot->add_option("--in", p_from, "Cumulative output directory (computed on the fly when omitted)");
  plot->add_option("--out", p_out, "Output SVG")->required();

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n\n";
      const CLI::App* failed = &app;
      for (const auto* sub : app.get_subcommands()) failed = sub;
      std::cerr << failed->help();
      return kExitUsage;
    }

    if (validate->parsed()) {
      const Dataset ds = v_in.load();
      std::cout << ds.unique_trial_count() << " trials, " << ds.comparison_count() << " comparisons, "
                << ds.reports().size() << " reports, " << ds.indications().size() << " indications\n";
      return kExitOk;
    }

    if (metrics->parsed()) {
      const Dataset ds = m_in.load();
      std::ostringstream s;
      write_metrics_csv(s, ds);
      emit(s.str(), m_out);
      if (!m_out.empty() && m_out != "-") manifest_for("metrics", m_in, {{"out", m_out}}, 0, dir_of(m_out));
      return kExitOk;
    }

    if (synth->parsed()) {
      const auto model = parse_model(s_model);
      if (!model) throw UsageError("unknown model '" + s_model + "' (expected ip, cp or hma)");
      const Outcome outcome = need_outcome(s_outcome);
      const SnapshotRule rule = need_rule(s_rule);
      std::optional<Date> as_of;
      if (!s_as_of.empty()) {
        as_of = Date::parse_iso(s_as_of);
        if (!as_of) throw UsageError("--as-of must be YYYY-MM-DD");
      }
      std::optional<Indication> scope;
      if (!s_indication.empty() && s_indication != "all") scope = need_indication(s_indication);
      const Dataset ds = s_in.load();
      const Date cut = as_of.value_or(Date(9999, 12, 31));
      const auto snap = snapshot(ds, outcome, cut, scope, rule);
      ModelSpec spec;
      spec.model = *model;
      McmcConfig cfg = s_mcmc.config();
      cfg.keep_study_draws = !s_dump.empty();
      const auto result = run_synthesis(snap.datapoints, spec, cfg);
      if (!result.converged)
        std::cerr << "warning: " << to_string(ErrorCode::NonConvergence) << ": max split-Rhat "
                  << result.max_rhat() << " exceeds " << kRhatThreshold << "\n";
      json j;
      j["as_of"] = as_of ? as_of->iso() : std::string("latest");
      j["outcome"] = std::string(to_string(outcome));
      j["scope"] = scope ? std::string(to_string(*scope)) : std::string("ALL");
      j["rule"] = std::string(to_string(rule));
      j["seed"] = cfg.seed;
      j["datapoints"] = snap.counts.total;
      j["result"] = to_json(result);
      emit(j.dump(2) + "\n", s_out);
      std::map<std::string, std::string> flags{{"model", s_model},   {"outcome", s_outcome},
                                               {"as-of", s_as_of},   {"indication", s_indication},
                                               {"rule", s_rule},     {"out", s_out},
                                               {"dump-draws", s_dump}};
      s_mcmc.record(flags);
      if (!s_dump.empty()) {
        dump_draws(result, s_dump);
        manifest_for("synth", s_in, flags, cfg.seed, s_dump);
      }
      if (!s_out.empty() && s_out != "-") manifest_for("synth", s_in, flags, cfg.seed, dir_of(s_out));
      return kExitOk;
    }

    if (cumulative->parsed()) {
      const Dataset ds = c_in.load();
      const auto outcomes = outcomes_arg(c_outcome);
      const auto inds = indications_arg(c_indication, ds);
      const SnapshotRule rule = need_rule(c_rule);
      const McmcConfig cfg = c_mcmc.config();
      CumulativeOptions opts;
      opts.rule = rule;
      opts.threads = c_threads;
      const bool nested = outcomes.size() > 1 || inds.size() > 1;
      std::size_t unconverged = 0;
      for (auto o : outcomes)
        for (auto ind : inds) {
          CumulativeRun run;
          try {
            run = run_cumulative(ds, o, ind, cfg, opts);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::NoEvidence || !nested) throw;
            std::cerr << "skip " << run_dir_name(o, ind) << ": " << e.what() << "\n";
            continue;
          }
          const fs::path dir = nested ? fs::path(c_out) / run_dir_name(o, ind) : fs::path(c_out);
          write_cumulative(run, dir);
          for (const auto& c : run.cells) {
            if (!c.ok()) std::cerr << "cell " << c.timepoint.iso() << "/" << to_string(c.model) << ": " << c.error << "\n";
            else if (!c.result->converged) ++unconverged;
          }
          std::cout << run_dir_name(o, ind) << ": " << run.timepoints.size() << " timepoints, " << run.cells.size()
                    << " cells -> " << dir.string() << "\n";
        }
      if (unconverged)
        std::cerr << "warning: " << unconverged << " cell(s) flagged " << to_string(ErrorCode::NonConvergence) << "\n";
      std::map<std::string, std::string> flags{
          {"outcome", c_outcome}, {"indication", c_indication}, {"rule", c_rule}, {"out", c_out}};
      c_mcmc.record(flags);
      manifest_for("cumulative", c_in, flags, cfg.seed, c_out);
      return kExitOk;
    }

    if (plot->parsed()) {
      const Dataset ds = p_in.load();
      viz::PlotSpec spec;
      std::uint64_t seed = 0;
      auto runs_for = [&](const std::vector<std::pair<Outcome, Indication>>& wanted) {
        std::vector<CumulativeRun> runs;
        if (!p_from.empty()) {
          for (auto& r : read_cumulative_tree(p_from))
            for (const auto& [o, i] : wanted)
              if (r.outcome == o && r.indication == i) runs.push_back(std::move(r));
          if (runs.size() != wanted.size())
            throw Error(ErrorCode::MissingDraws, "--in " + p_from + " lacks some of the required cumulative runs");
        } else {
          const McmcConfig cfg = p_mcmc.config();
          seed = cfg.seed;
          for (const auto& [o, i] : wanted) runs.push_back(run_cumulative(ds, o, i, cfg));
        }
        return runs;
      };
      if (p_kind == "timeline") {
        const auto v = viz::parse_timeline_variant(p_variant);
        if (!v) throw UsageError("unknown timeline variant '" + p_variant + "'");
        spec = viz::build_timeline(ds, *v);
      } else if (p_kind == "ridgeline") {
        const auto o = viz::parse_ridgeline_order(p_order);
        if (!o) throw UsageError("unknown ridgeline order '" + p_order + "'");
        spec = viz::build_ridgeline(ds, *o);
      } else if (p_kind == "synth-ridgeline") {
        const auto mode = viz::parse_synth_mode(p_mode);
        if (!mode) throw UsageError("unknown synthesis ridgeline mode '" + p_mode + "'");
        if (p_indication.empty() || p_indication == "all")
          throw UsageError("synth-ridgeline needs --indication");
        const auto runs = runs_for({{need_outcome(p_outcome), need_indication(p_indication)}});
        spec = viz::build_synth_ridgeline(runs.front(), *mode);
      } else {
        std::vector<std::pair<Outcome, Indication>> wanted;
        for (auto ind : indications_arg(p_indication, ds)) {
          wanted.emplace_back(Outcome::OS, ind);
          wanted.emplace_back(Outcome::PFS, ind);
        }
        const auto runs = runs_for(wanted);
        std::vector<viz::ViolinInput> inputs;
        for (const auto& [o, ind] : wanted) {
          if (o != Outcome::OS) continue;
          const CumulativeRun *os = nullptr, *pfs = nullptr;
          for (const auto& r : runs) {
            if (r.indication != ind) continue;
            (r.outcome == Outcome::OS ? os : pfs) = &r;
          }
          for (auto& vi : viz::violin_inputs(*os, *pfs)) inputs.push_back(std::move(vi));
        }
        spec = viz::build_split_violin(inputs);
      }
      write_text_file(p_out, viz::render_svg(spec));
      std::map<std::string, std::string> flags{{"kind", p_kind},       {"variant", p_variant}, {"order", p_order},
                                               {"mode", p_mode},       {"outcome", p_outcome}, {"indication", p_indication},
                                               {"in", p_from},         {"out", p_out}};
      p_mcmc.record(flags);
      manifest_for("plot", p_in, flags, seed, dir_of(p_out));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.issues().size() << " issue(s)\n";
    for (const auto& i : e.issues()) std::cerr << "  " << i.describe() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitUsage;
}

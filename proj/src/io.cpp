#include "evimap/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "evimap/csv.hpp"

namespace evimap {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Vector thinned(const Vector& v, std::size_t max_draws) {
  const auto n = static_cast<std::size_t>(v.size());
  if (n <= max_draws) return v;
  Vector out(static_cast<Eigen::Index>(max_draws));
  for (std::size_t i = 0; i < max_draws; ++i)
    out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(i * n / max_draws));
  return out;
}

ErrorCode parse_error_code(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::Io); ++i)
    if (to_string(static_cast<ErrorCode>(i)) == s) return static_cast<ErrorCode>(i);
  throw Error(ErrorCode::BadValue, "unknown error code '" + s + "'");
}

template <typename T, typename F>
T parse_or_throw(const std::string& s, F parse, const char* what) {
  const auto v = parse(s);
  if (!v) throw Error(ErrorCode::BadValue, std::string("unknown ") + what + " '" + s + "'");
  return *v;
}

Indication ind_of(const std::string& s) { return parse_or_throw<Indication>(s, parse_indication, "indication"); }

std::string bin_text(const std::optional<SizeBin>& b) {
  if (!b) return "";
  return b->extreme() ? "EXTREME" : std::to_string(b->index);
}

}  // namespace

json to_json(const PosteriorSummary& s, std::size_t max_draws) {
  json j{{"median", s.median}, {"lower95", s.lower95}, {"upper95", s.upper95}};
  if (s.has_draws()) {
    j["mean"] = s.mean();
    j["sd"] = s.sd();
  }
  if (max_draws > 0 && s.has_draws()) {
    const Vector t = thinned(s.draws, max_draws);
    j["draws"] = std::vector<double>(t.data(), t.data() + t.size());
  }
  return j;
}

PosteriorSummary summary_from_json(const json& j) {
  PosteriorSummary s;
  s.median = j.at("median").get<double>();
  s.lower95 = j.at("lower95").get<double>();
  s.upper95 = j.at("upper95").get<double>();
  if (j.contains("draws")) {
    const auto v = j.at("draws").get<std::vector<double>>();
    s.draws = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return s;
}

json to_json(const SynthesisResult& r, std::size_t max_draws) {
  json j;
  j["model"] = std::string(to_string(r.model));
  j["n_datapoints"] = r.n_datapoints;
  json pooled = json::object(), within = json::object(), studies = json::object();
  for (const auto& [ind, s] : r.pooled_effect) pooled[std::string(to_string(ind))] = to_json(s, max_draws);
  for (const auto& [ind, s] : r.within_sd) within[std::string(to_string(ind))] = to_json(s, max_draws);
  for (const auto& [label, s] : r.study_effects) studies[label] = to_json(s, max_draws);
  j["pooled_effect"] = pooled;
  j["within_sd"] = within;
  if (r.between_sd) j["between_sd"] = to_json(*r.between_sd, max_draws);
  if (r.overall_mean) j["overall_mean"] = to_json(*r.overall_mean, max_draws);
  j["study_effects"] = studies;
  j["fit"] = {{"dbar", r.fit.dbar}, {"pd", r.fit.pd}, {"dic", r.fit.dic}};
  j["rhat"] = r.rhat;
  j["max_rhat"] = r.max_rhat();
  j["converged"] = r.converged;
  return j;
}

SynthesisResult synthesis_from_json(const json& j) {
  SynthesisResult r;
  r.model = parse_or_throw<ModelKind>(j.at("model").get<std::string>(), parse_model, "model");
  r.n_datapoints = j.value("n_datapoints", std::size_t{0});
  for (const auto& [k, v] : j.at("pooled_effect").items()) r.pooled_effect[ind_of(k)] = summary_from_json(v);
  for (const auto& [k, v] : j.at("within_sd").items()) r.within_sd[ind_of(k)] = summary_from_json(v);
  if (j.contains("between_sd")) r.between_sd = summary_from_json(j.at("between_sd"));
  if (j.contains("overall_mean")) r.overall_mean = summary_from_json(j.at("overall_mean"));
  if (j.contains("study_effects"))
    for (const auto& [k, v] : j.at("study_effects").items()) r.study_effects[k] = summary_from_json(v);
  const auto& f = j.at("fit");
  r.fit = {f.at("dbar").get<double>(), f.at("pd").get<double>(), f.at("dic").get<double>()};
  if (j.contains("rhat")) r.rhat = j.at("rhat").get<std::map<std::string, double>>();
  r.converged = j.value("converged", true);
  return r;
}

json to_json(const Datapoint& d) {
  return {{"label", d.label}, {"indication", std::string(to_string(d.indication))}, {"y", d.y}, {"sigma", d.sigma}};
}

Datapoint datapoint_from_json(const json& j) {
  return {j.at("y").get<double>(), j.at("sigma").get<double>(), ind_of(j.at("indication").get<std::string>()),
          j.at("label").get<std::string>()};
}

json to_json(const OutcomeReport& r) {
  json j{{"trial_id", r.key.trial_id},
         {"outcome", std::string(to_string(r.outcome))},
         {"cutoff_date", r.cutoff_date.iso()},
         {"hr", r.hr},
         {"ci_lower", r.ci_lower},
         {"ci_upper", r.ci_upper},
         {"is_final", r.is_final}};
  if (r.key.subtrial_id) j["subtrial_id"] = *r.key.subtrial_id;
  if (r.events_control) j["events_control"] = *r.events_control;
  if (r.events_comparator) j["events_comparator"] = *r.events_comparator;
  if (r.assessment_method) j["assessment_method"] = std::string(to_string(*r.assessment_method));
  return j;
}

OutcomeReport report_from_json(const json& j) {
  OutcomeReport r;
  r.key.trial_id = j.at("trial_id").get<std::string>();
  if (j.contains("subtrial_id")) r.key.subtrial_id = j.at("subtrial_id").get<std::string>();
  r.outcome = parse_or_throw<Outcome>(j.at("outcome").get<std::string>(), parse_outcome, "outcome");
  const auto d = Date::parse_iso(j.at("cutoff_date").get<std::string>());
  if (!d) throw Error(ErrorCode::BadDate, "bad cutoff_date in JSON");
  r.cutoff_date = *d;
  r.hr = j.at("hr").get<double>();
  r.ci_lower = j.at("ci_lower").get<double>();
  r.ci_upper = j.at("ci_upper").get<double>();
  r.is_final = j.at("is_final").get<bool>();
  if (j.contains("events_control")) r.events_control = j.at("events_control").get<int>();
  if (j.contains("events_comparator")) r.events_comparator = j.at("events_comparator").get<int>();
  if (j.contains("assessment_method"))
    r.assessment_method = parse_assessment_method(j.at("assessment_method").get<std::string>());
  return r;
}

json to_json(const CumulativeCell& c, std::size_t max_draws) {
  json j;
  j["timepoint_index"] = c.timepoint_index;
  j["timepoint"] = c.timepoint.iso();
  j["model"] = std::string(to_string(c.model));
  j["seed"] = c.seed;
  json snap;
  snap["as_of"] = c.snapshot.as_of.iso();
  snap["outcome"] = std::string(to_string(c.snapshot.outcome));
  snap["scope"] = c.snapshot.scope ? std::string(to_string(*c.snapshot.scope)) : std::string("ALL");
  snap["total"] = c.snapshot.counts.total;
  json per = json::object();
  for (const auto& [ind, n] : c.snapshot.counts.per_indication) per[std::string(to_string(ind))] = n;
  snap["per_indication"] = per;
  json reports = json::array(), points = json::array();
  for (const auto& r : c.snapshot.reports) reports.push_back(to_json(r));
  for (const auto& d : c.snapshot.datapoints) points.push_back(to_json(d));
  snap["reports"] = reports;
  snap["datapoints"] = points;
  j["snapshot"] = snap;
  if (c.result) j["result"] = to_json(*c.result, max_draws);
  if (c.error_code) {
    j["error_code"] = std::string(to_string(*c.error_code));
    j["error"] = c.error;
  }
  return j;
}

CumulativeCell cell_from_json(const json& j) {
  CumulativeCell c;
  c.timepoint_index = j.at("timepoint_index").get<std::size_t>();
  c.timepoint = *Date::parse_iso(j.at("timepoint").get<std::string>());
  c.model = parse_or_throw<ModelKind>(j.at("model").get<std::string>(), parse_model, "model");
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& snap = j.at("snapshot");
  c.snapshot.as_of = *Date::parse_iso(snap.at("as_of").get<std::string>());
  c.snapshot.outcome = parse_or_throw<Outcome>(snap.at("outcome").get<std::string>(), parse_outcome, "outcome");
  const auto scope = snap.at("scope").get<std::string>();
  if (scope != "ALL") c.snapshot.scope = ind_of(scope);
  c.snapshot.counts.total = snap.at("total").get<std::size_t>();
  for (const auto& [k, v] : snap.at("per_indication").items())
    c.snapshot.counts.per_indication[ind_of(k)] = v.get<std::size_t>();
  for (const auto& r : snap.at("reports")) c.snapshot.reports.push_back(report_from_json(r));
  for (const auto& d : snap.at("datapoints")) c.snapshot.datapoints.push_back(datapoint_from_json(d));
  if (j.contains("result")) c.result = synthesis_from_json(j.at("result"));
  if (j.contains("error_code")) {
    c.error_code = parse_error_code(j.at("error_code").get<std::string>());
    c.error = j.value("error", std::string{});
  }
  return c;
}

void write_text_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + p.string());
}

std::string read_text_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_cumulative(const CumulativeRun& run, const fs::path& dir, std::size_t max_draws) {
  fs::create_directories(dir / "cells");
  json meta;
  meta["indication"] = std::string(to_string(run.indication));
  meta["outcome"] = std::string(to_string(run.outcome));
  meta["rule"] = std::string(to_string(run.rule));
  json tps = json::array();
  for (const auto& t : run.timepoints) tps.push_back(t.iso());
  meta["timepoints"] = tps;
  json files = json::array();
  for (const auto& c : run.cells) {
    const std::string name = c.timepoint.iso() + "_" + std::string(to_string(c.model)) + ".json";
    write_text_file(dir / "cells" / name, to_json(c, max_draws).dump(1) + "\n");
    files.push_back("cells/" + name);
  }
  meta["cells"] = files;
  write_text_file(dir / "run.json", meta.dump(1) + "\n");
  std::ostringstream roll;
  write_rollup_csv(roll, run);
  write_text_file(dir / "rollup.csv", roll.str());
}

CumulativeRun read_cumulative(const fs::path& dir) {
  const json meta = json::parse(read_text_file(dir / "run.json"));
  CumulativeRun run;
  run.indication = ind_of(meta.at("indication").get<std::string>());
  run.outcome = parse_or_throw<Outcome>(meta.at("outcome").get<std::string>(), parse_outcome, "outcome");
  run.rule = parse_or_throw<SnapshotRule>(meta.at("rule").get<std::string>(), parse_snapshot_rule, "rule");
  for (const auto& t : meta.at("timepoints")) run.timepoints.push_back(*Date::parse_iso(t.get<std::string>()));
  for (const auto& f : meta.at("cells"))
    run.cells.push_back(cell_from_json(json::parse(read_text_file(dir / f.get<std::string>()))));
  return run;
}

std::vector<CumulativeRun> read_cumulative_tree(const fs::path& root) {
  std::vector<fs::path> dirs;
  if (fs::exists(root / "run.json")) dirs.push_back(root);
  if (fs::is_directory(root))
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().filename() == "run.json" && e.path().parent_path() != root)
        dirs.push_back(e.path().parent_path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<CumulativeRun> out;
  for (const auto& d : dirs) out.push_back(read_cumulative(d));
  return out;
}

void write_rollup_csv(std::ostream& out, const CumulativeRun& run) {
  const std::string ind(to_string(run.indication));
  csv::write_row(out, {"timepoint", "model", "outcome", "indication", "datapoints_total", "datapoints_indication",
                       "effect_median", "effect_lower95", "effect_upper95", "within_sd_median",
                       "within_sd_lower95", "within_sd_upper95", "between_sd_median", "between_sd_lower95",
                       "between_sd_upper95", "dbar", "pd", "dic", "max_rhat", "converged", "error"});
  for (const auto& c : run.cells) {
    csv::Row row{c.timepoint.iso(),
                 std::string(to_string(c.model)),
                 std::string(to_string(run.outcome)),
                 ind,
                 std::to_string(c.snapshot.counts.total),
                 std::to_string(c.snapshot.counts.of(run.indication))};
    auto add = [&](const PosteriorSummary* s) {
      for (double v : {s ? s->median : 0.0, s ? s->lower95 : 0.0, s ? s->upper95 : 0.0})
        row.push_back(s ? fmt6(v) : "");
    };
    if (c.result) {
      const auto& r = *c.result;
      auto find = [&](const auto& m) -> const PosteriorSummary* {
        const auto it = m.find(run.indication);
        return it == m.end() ? nullptr : &it->second;
      };
      add(find(r.pooled_effect));
      add(find(r.within_sd));
      add(r.between_sd ? &*r.between_sd : nullptr);
      row.push_back(fmt6(r.fit.dbar));
      row.push_back(fmt6(r.fit.pd));
      row.push_back(fmt6(r.fit.dic));
      row.push_back(fmt6(r.max_rhat()));
      row.push_back(r.converged ? "true" : "false");
      row.push_back("");
    } else {
      for (int k = 0; k < 9 + 5; ++k) row.push_back("");
      row.push_back(c.error);
    }
    csv::write_row(out, row);
  }
}

void dump_draws(const SynthesisResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const PosteriorSummary& s) {
    std::ostringstream o;
    o << "draw\n";
    for (Eigen::Index i = 0; i < s.draws.size(); ++i) o << fmt17(s.draws(i)) << "\n";
    write_text_file(dir / (name + ".csv"), o.str());
  };
  if (r.model == ModelKind::CP) {
    if (!r.pooled_effect.empty()) write("d", r.pooled_effect.begin()->second);
  } else {
    for (const auto& [ind, s] : r.pooled_effect) write("d_" + std::string(to_string(ind)), s);
  }
  for (const auto& [ind, s] : r.within_sd) write("tau_" + std::string(to_string(ind)), s);
  if (r.overall_mean) write("m_d", *r.overall_mean);
  if (r.between_sd) write("tau_d", *r.between_sd);
  for (const auto& [label, s] : r.study_effects) {
    std::string safe = label;
    for (auto& ch : safe)
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
    write("delta_" + safe, s);
  }
}

void write_metrics_csv(std::ostream& out, const Dataset& ds) {
  csv::write_row(out, {"trial_id", "subtrial_id", "indication", "outcome", "cutoff_date", "is_final", "hr",
                       "ci_lower", "ci_upper", "ln_hr", "se", "ci_width", "rel_uncertainty", "maturity_control",
                       "maturity_comparator", "ci_width_bin", "rel_unc_bin", "maturity_control_bin",
                       "maturity_comparator_bin"});
  for (const auto& r : ds.reports()) {
    const auto m = compute_metrics(ds, r);
    auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
    csv::write_row(out, {r.key.trial_id, r.key.subtrial_id.value_or(""),
                         std::string(to_string(ds.trial_of(r).indication)), std::string(to_string(r.outcome)),
                         r.cutoff_date.iso(), r.is_final ? "true" : "false", fmt17(r.hr), fmt17(r.ci_lower),
                         fmt17(r.ci_upper), fmt17(m.effect.ln_hr), fmt17(m.effect.se), fmt17(m.ci_width),
                         opt(m.rel_uncertainty), opt(m.maturity_control), opt(m.maturity_comparator),
                         bin_text(m.ci_width_bin), bin_text(m.rel_unc_bin), bin_text(m.maturity_control_bin),
                         bin_text(m.maturity_comparator_bin)});
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Io, "sha256 failed");
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return s.str();
}

std::string sha256_file(const fs::path& p) { return sha256_hex(read_text_file(p)); }

bool RunManifest::same_run(const RunManifest& o) const {
  return tool == o.tool && version == o.version && command == o.command && flags == o.flags &&
         input_digests == o.input_digests && seed == o.seed;
}

json to_json(const RunManifest& m) {
  return {{"tool", m.tool},   {"version", m.version},          {"command", m.command},
          {"flags", m.flags}, {"inputs", m.input_digests},     {"seed", m.seed},
          {"timestamp", m.timestamp}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.tool = j.at("tool").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.command = j.at("command").get<std::string>();
  m.flags = j.at("flags").get<std::map<std::string, std::string>>();
  m.input_digests = j.at("inputs").get<std::map<std::string, std::string>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.timestamp = j.value("timestamp", std::string{});
  return m;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m, const fs::path& dir) {
  write_text_file(dir / "manifest.json", to_json(m).dump(2) + "\n");
}

}  // namespace evimap

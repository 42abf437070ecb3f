#include "evimap/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "evimap/csv.hpp"

namespace evimap {
namespace {

constexpr const char* kTrialsFile = "trials.csv";
constexpr const char* kOutcomesFile = "outcomes.csv";

const std::vector<std::string> kTrialColumns = {
    "trial_id",         "subtrial_id", "indication",  "start_date",
    "end_date",         "comparator_class", "n_control", "n_comparator"};
const std::vector<std::string> kOutcomeColumns = {
    "trial_id", "subtrial_id", "outcome",         "cutoff_date",       "hr",       "ci_lower",
    "ci_upper", "events_control", "events_comparator", "is_final", "assessment_method"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

/// Maps header names to column indices and records missing ones.
class Columns {
 public:
  Columns(const csv::Row& header, const std::vector<std::string>& required, const char* file,
          std::vector<ValidationIssue>& issues) {
    for (std::size_t i = 0; i < header.size(); ++i) index_[trim(header[i])] = i;
    for (const auto& name : required)
      if (!index_.count(name))
        issues.push_back({ErrorCode::MissingColumn, file, 1, name, "required column is missing"});
  }
  bool complete(const std::vector<std::string>& required) const {
    return std::all_of(required.begin(), required.end(),
                       [&](const std::string& n) { return index_.count(n) > 0; });
  }
  std::string get(const csv::Row& row, const std::string& name) const {
    const auto i = index_.at(name);
    return i < row.size() ? trim(row[i]) : std::string{};
  }

 private:
  std::map<std::string, std::size_t> index_;
};

/// Per-row field parsing that appends an issue and returns nullopt on failure.
struct RowParser {
  const Columns& cols;
  const csv::Row& row;
  const char* file;
  int row_no;
  std::vector<ValidationIssue>& issues;

  void fail(ErrorCode code, const std::string& column, const std::string& msg) {
    issues.push_back({code, file, row_no, column, msg});
  }

  std::string text(const std::string& column) { return cols.get(row, column); }

  std::optional<std::string> required_text(const std::string& column) {
    auto v = text(column);
    if (v.empty()) {
      fail(ErrorCode::BadValue, column, "value is required");
      return std::nullopt;
    }
    return v;
  }

  std::optional<Date> date(const std::string& column, bool required) {
    const auto v = text(column);
    if (v.empty()) {
      if (required) fail(ErrorCode::BadDate, column, "date is required");
      return std::nullopt;
    }
    auto d = Date::parse_iso(v);
    if (!d) fail(ErrorCode::BadDate, column, "'" + v + "' is not an ISO-8601 date (YYYY-MM-DD)");
    return d;
  }

  std::optional<int> integer(const std::string& column, bool required, int min_value) {
    const auto v = text(column);
    if (v.empty()) {
      if (required) fail(ErrorCode::BadValue, column, "integer is required");
      return std::nullopt;
    }
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
      fail(ErrorCode::BadValue, column, "'" + v + "' is not an integer");
      return std::nullopt;
    }
    if (out < min_value) {
      fail(ErrorCode::BadValue, column, "must be >= " + std::to_string(min_value));
      return std::nullopt;
    }
    return out;
  }

  std::optional<double> positive(const std::string& column) {
    const auto v = text(column);
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
      fail(ErrorCode::BadValue, column, "'" + v + "' is not a number");
      return std::nullopt;
    }
    if (!(out > 0.0)) {
      fail(ErrorCode::BadValue, column, "must be positive");
      return std::nullopt;
    }
    return out;
  }

  template <typename E, typename ParseFn>
  std::optional<E> enumeration(const std::string& column, ParseFn parse, bool required) {
    const auto v = text(column);
    if (v.empty()) {
      if (required) fail(ErrorCode::BadValue, column, "value is required");
      return std::nullopt;
    }
    auto e = parse(v);
    if (!e) fail(ErrorCode::BadValue, column, "unknown code '" + v + "'");
    return e;
  }

  std::optional<bool> boolean(const std::string& column) {
    auto v = text(column);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
    fail(ErrorCode::BadValue, column, "'" + v + "' is not a boolean");
    return std::nullopt;
  }
};

ComparisonKey make_key(std::string trial, std::string sub) {
  return {std::move(trial), sub.empty() ? std::nullopt : std::optional<std::string>(std::move(sub))};
}

/// Cross-record invariants. Row numbers index the original CSV rows.
void validate(const std::vector<TrialRecord>& trials, const std::vector<int>& trial_rows,
              const std::vector<OutcomeReport>& reports, const std::vector<int>& report_rows,
              std::vector<ValidationIssue>& issues) {
  std::map<ComparisonKey, const TrialRecord*> by_key;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    const int row = trial_rows[i];
    if (!by_key.emplace(t.key, &t).second)
      issues.push_back({ErrorCode::DuplicateTrial, kTrialsFile, row, "trial_id",
                        "duplicate comparison " + t.key.label()});
    if (t.end_date && *t.end_date < t.start_date)
      issues.push_back({ErrorCode::BadDate, kTrialsFile, row, "end_date",
                        "end_date precedes start_date"});
    if (t.n_control < 1)
      issues.push_back({ErrorCode::BadValue, kTrialsFile, row, "n_control", "must be >= 1"});
    if (t.n_comparator < 1)
      issues.push_back({ErrorCode::BadValue, kTrialsFile, row, "n_comparator", "must be >= 1"});
  }

  std::set<std::tuple<ComparisonKey, Outcome, Date>> seen_dates;
  std::map<std::pair<ComparisonKey, Outcome>, int> finals;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const int row = report_rows[i];
    if (!(r.ci_lower <= r.hr))
      issues.push_back({ErrorCode::CiOrderViolation, kOutcomesFile, row, "ci_lower",
                        "ci_lower exceeds hr"});
    if (!(r.hr <= r.ci_upper))
      issues.push_back({ErrorCode::CiOrderViolation, kOutcomesFile, row, "ci_upper",
                        "hr exceeds ci_upper"});

    const auto it = by_key.find(r.key);
    if (it == by_key.end()) {
      issues.push_back({ErrorCode::DanglingReport, kOutcomesFile, row, "trial_id",
                        "no trial record for " + r.key.label()});
    } else {
      const TrialRecord& t = *it->second;
      if (r.events_control && *r.events_control > t.n_control)
        issues.push_back({ErrorCode::BadValue, kOutcomesFile, row, "events_control",
                          "exceeds n_control of " + t.key.label()});
      if (r.events_comparator && *r.events_comparator > t.n_comparator)
        issues.push_back({ErrorCode::BadValue, kOutcomesFile, row, "events_comparator",
                          "exceeds n_comparator of " + t.key.label()});
    }

    if (!seen_dates.emplace(r.key, r.outcome, r.cutoff_date).second)
      issues.push_back({ErrorCode::DuplicateReport, kOutcomesFile, row, "cutoff_date",
                        "second " + std::string(to_string(r.outcome)) + " report for " +
                            r.key.label() + " on " + r.cutoff_date.iso()});
    if (r.is_final && ++finals[{r.key, r.outcome}] > 1)
      issues.push_back({ErrorCode::DuplicateReport, kOutcomesFile, row, "is_final",
                        "more than one final " + std::string(to_string(r.outcome)) +
                            " report for " + r.key.label()});
  }
}

Dataset finish(std::vector<TrialRecord> trials, std::vector<int> trial_rows,
               std::vector<OutcomeReport> reports, std::vector<int> report_rows,
               std::vector<ValidationIssue> issues);

}  // namespace

std::string ComparisonKey::label() const {
  return subtrial_id ? trial_id + "/" + *subtrial_id : trial_id;
}

std::string ValidationIssue::describe() const {
  std::ostringstream os;
  os << to_string(code) << " in " << file;
  if (row > 0) os << " row " << row;
  if (!column.empty()) os << " column '" << column << "'";
  os << ": " << message;
  return os.str();
}

namespace {
std::string summarize_issues(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << issues.size() << " validation issue(s)";
  for (const auto& i : issues) os << "\n  " << i.describe();
  return os.str();
}
}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : Error(issues.empty() ? ErrorCode::BadValue : issues.front().code, summarize_issues(issues)),
      issues_(std::move(issues)) {}

bool report_order(const OutcomeReport& a, const OutcomeReport& b) {
  return std::tie(a.cutoff_date, a.key.trial_id, a.key.subtrial_id, a.outcome) <
         std::tie(b.cutoff_date, b.key.trial_id, b.key.subtrial_id, b.outcome);
}

namespace {
Dataset finish(std::vector<TrialRecord> trials, std::vector<int> trial_rows,
               std::vector<OutcomeReport> reports, std::vector<int> report_rows,
               std::vector<ValidationIssue> issues) {
  validate(trials, trial_rows, reports, report_rows, issues);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return Dataset::build(std::move(trials), std::move(reports));
}
}  // namespace

Dataset Dataset::build(std::vector<TrialRecord> trials, std::vector<OutcomeReport> reports) {
  std::vector<int> trial_rows(trials.size()), report_rows(reports.size());
  for (std::size_t i = 0; i < trial_rows.size(); ++i) trial_rows[i] = static_cast<int>(i) + 2;
  for (std::size_t i = 0; i < report_rows.size(); ++i) report_rows[i] = static_cast<int>(i) + 2;
  std::vector<ValidationIssue> issues;
  validate(trials, trial_rows, reports, report_rows, issues);
  if (!issues.empty()) throw ValidationError(std::move(issues));

  Dataset ds;
  ds.trials_ = std::move(trials);
  ds.reports_ = std::move(reports);
  std::sort(ds.reports_.begin(), ds.reports_.end(), report_order);
  return ds;
}

const TrialRecord* Dataset::find(const ComparisonKey& key) const {
  for (const auto& t : trials_)
    if (t.key == key) return &t;
  return nullptr;
}

const TrialRecord& Dataset::trial_of(const OutcomeReport& r) const {
  const auto* t = find(r.key);
  if (!t) throw Error(ErrorCode::DanglingReport, r.key.label());
  return *t;
}

std::size_t Dataset::unique_trial_count() const {
  std::set<std::string> ids;
  for (const auto& t : trials_) ids.insert(t.key.trial_id);
  return ids.size();
}

std::vector<Indication> Dataset::indications() const {
  std::vector<Indication> out;
  for (auto ind : kAllIndications)
    if (std::any_of(trials_.begin(), trials_.end(),
                    [&](const TrialRecord& t) { return t.indication == ind; }))
      out.push_back(ind);
  return out;
}

Dataset load_dataset(std::istream& trials_in, std::istream& outcomes_in) {
  std::vector<ValidationIssue> issues;
  std::vector<TrialRecord> trials;
  std::vector<int> trial_rows;
  std::vector<OutcomeReport> reports;
  std::vector<int> report_rows;

  const auto trial_csv = csv::read(trials_in);
  const auto outcome_csv = csv::read(outcomes_in);
  if (trial_csv.empty())
    issues.push_back({ErrorCode::MissingColumn, kTrialsFile, 1, "", "header row is missing"});
  if (outcome_csv.empty())
    issues.push_back({ErrorCode::MissingColumn, kOutcomesFile, 1, "", "header row is missing"});
  if (!issues.empty()) throw ValidationError(std::move(issues));

  const Columns tcols(trial_csv.front(), kTrialColumns, kTrialsFile, issues);
  const Columns ocols(outcome_csv.front(), kOutcomeColumns, kOutcomesFile, issues);
  if (!tcols.complete(kTrialColumns) || !ocols.complete(kOutcomeColumns))
    throw ValidationError(std::move(issues));

  for (std::size_t i = 1; i < trial_csv.size(); ++i) {
    const int row_no = static_cast<int>(i) + 1;
    RowParser p{tcols, trial_csv[i], kTrialsFile, row_no, issues};
    const auto before = issues.size();
    auto id = p.required_text("trial_id");
    auto ind = p.enumeration<Indication>("indication", parse_indication, true);
    auto start = p.date("start_date", true);
    auto end = p.date("end_date", false);
    auto cls = p.enumeration<ComparatorClass>("comparator_class", parse_comparator_class, true);
    auto nc = p.integer("n_control", true, 1);
    auto nb = p.integer("n_comparator", true, 1);
    if (issues.size() != before) continue;
    trials.push_back(
        {make_key(*id, p.text("subtrial_id")), *ind, *start, end, *cls, *nc, *nb});
    trial_rows.push_back(row_no);
  }

  for (std::size_t i = 1; i < outcome_csv.size(); ++i) {
    const int row_no = static_cast<int>(i) + 1;
    RowParser p{ocols, outcome_csv[i], kOutcomesFile, row_no, issues};
    const auto before = issues.size();
    auto id = p.required_text("trial_id");
    auto outcome = p.enumeration<Outcome>("outcome", parse_outcome, true);
    auto cutoff = p.date("cutoff_date", true);
    auto hr = p.positive("hr");
    auto lo = p.positive("ci_lower");
    auto hi = p.positive("ci_upper");
    auto ec = p.integer("events_control", false, 0);
    auto eb = p.integer("events_comparator", false, 0);
    auto fin = p.boolean("is_final");
    auto am = p.enumeration<AssessmentMethod>("assessment_method", parse_assessment_method, false);
    if (issues.size() != before) continue;
    reports.push_back({make_key(*id, p.text("subtrial_id")), *outcome, *cutoff, *hr, *lo, *hi, ec,
                       eb, *fin, am});
    report_rows.push_back(row_no);
  }

  return finish(std::move(trials), std::move(trial_rows), std::move(reports),
                std::move(report_rows), std::move(issues));
}

Dataset load_dataset(const std::string& trials_path, const std::string& outcomes_path) {
  std::ifstream t(trials_path, std::ios::binary);
  if (!t) throw Error(ErrorCode::Io, "cannot open " + trials_path);
  std::ifstream o(outcomes_path, std::ios::binary);
  if (!o) throw Error(ErrorCode::Io, "cannot open " + outcomes_path);
  return load_dataset(t, o);
}

namespace {
std::string fmt_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string{}; }
}  // namespace

void write_trials_csv(std::ostream& out, const Dataset& ds) {
  csv::write_row(out, kTrialColumns);
  for (const auto& t : ds.trials())
    csv::write_row(out, {t.key.trial_id, t.key.subtrial_id.value_or(""),
                         std::string(to_string(t.indication)), t.start_date.iso(),
                         t.end_date ? t.end_date->iso() : "",
                         std::string(to_string(t.comparator_class)), std::to_string(t.n_control),
                         std::to_string(t.n_comparator)});
}

void write_outcomes_csv(std::ostream& out, const Dataset& ds) {
  csv::write_row(out, kOutcomeColumns);
  for (const auto& r : ds.reports())
    csv::write_row(out, {r.key.trial_id, r.key.subtrial_id.value_or(""),
                         std::string(to_string(r.outcome)), r.cutoff_date.iso(), fmt_number(r.hr),
                         fmt_number(r.ci_lower), fmt_number(r.ci_upper), opt_int(r.events_control),
                         opt_int(r.events_comparator), r.is_final ? "true" : "false",
                         r.assessment_method ? std::string(to_string(*r.assessment_method)) : ""});
}

std::vector<OutcomeReport> reports_for(const Dataset& ds, Indication indication, Outcome outcome,
                                       std::optional<Date> as_of) {
  std::vector<OutcomeReport> out;
  for (const auto& r : ds.reports()) {
    if (r.outcome != outcome) continue;
    if (as_of && r.cutoff_date > *as_of) continue;
    if (ds.trial_of(r).indication != indication) continue;
    out.push_back(r);
  }
  return out;  // ds.reports() is already in canonical order
}

}  // namespace evimap

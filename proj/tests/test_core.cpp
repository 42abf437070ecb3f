#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "evimap/core.hpp"
#include "evimap/csv.hpp"
#include "evimap/dataset.hpp"
#include "fixture.hpp"

using namespace evimap;
using evimap::testing::fixture;

namespace {

const char* kTrialsHeader =
    "trial_id,subtrial_id,indication,start_date,end_date,comparator_class,n_control,n_comparator\n";
const char* kOutcomesHeader =
    "trial_id,subtrial_id,outcome,cutoff_date,hr,ci_lower,ci_upper,events_control,events_comparator,is_final,"
    "assessment_method\n";

std::vector<ValidationIssue> issues_of(const std::string& trials, const std::string& outcomes) {
  std::istringstream t(trials), o(outcomes);
  try {
    load_dataset(t, o);
  } catch (const ValidationError& e) {
    return e.issues();
  }
  return {};
}

bool has_issue(const std::vector<ValidationIssue>& v, ErrorCode c, int row) {
  return std::any_of(v.begin(), v.end(), [&](const ValidationIssue& i) { return i.code == c && i.row == row; });
}

}  // namespace

TEST_CASE("enum codes round-trip case-insensitively") {
  for (auto i : kAllIndications) CHECK(parse_indication(to_string(i)) == i);
  CHECK(parse_indication("nsclc") == Indication::NSCLC);
  CHECK(parse_outcome("Pfs") == Outcome::PFS);
  CHECK_FALSE(parse_indication("LUNG").has_value());
  CHECK(parse_comparator_class("imm") == ComparatorClass::IMM);
  CHECK(parse_assessment_method("IRC") == AssessmentMethod::IRC);
}

TEST_CASE("date parsing is strict") {
  CHECK(Date::parse_iso("2004-02-29").has_value());
  CHECK_FALSE(Date::parse_iso("2003-02-29").has_value());
  CHECK_FALSE(Date::parse_iso("2003-2-01").has_value());
  CHECK_FALSE(Date::parse_iso("01/12/2003").has_value());
  CHECK_FALSE(Date::parse_iso("2003-12-01x").has_value());
  CHECK(Date::parse_iso("1970-01-01")->days() == 0);
  CHECK(Date(2009, 12, 31).iso() == "2009-12-31");
  CHECK(Date::year_end(2014) == Date(2014, 12, 31));
  CHECK(Date(2004, 1, 1).decimal_year() == doctest::Approx(2004.0));
  CHECK(Date(2003, 7, 2).decimal_year() == doctest::Approx(2003.5).epsilon(0.003));
  CHECK(Date(2003, 1, 1) < Date(2003, 1, 2));
}

TEST_CASE("error carries its code") {
  const Error e(ErrorCode::NullEffect, "x");
  CHECK(e.code() == ErrorCode::NullEffect);
  CHECK(std::string(e.what()).find("NullEffect") != std::string::npos);
}

TEST_CASE("csv reader handles quoting, CRLF and BOM") {
  std::istringstream in("\xEF\xBB\xBF" "a,b,c\r\n\"x,1\",\"he said \"\"hi\"\"\",\r\n\n\"multi\nline\",2,3\n");
  const auto rows = csv::read(in);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == csv::Row{"a", "b", "c"});
  CHECK(rows[1] == csv::Row{"x,1", "he said \"hi\"", ""});
  CHECK(rows[2][0] == "multi\nline");
}

TEST_CASE("csv write then read is the identity") {
  std::mt19937 rng(7);
  const std::string alphabet = "ab ,\"\n1";
  std::uniform_int_distribution<int> len(0, 6), pick(0, static_cast<int>(alphabet.size()) - 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<csv::Row> rows(3, csv::Row(4));
    for (auto& r : rows)
      for (auto& f : r) {
        const int n = len(rng);
        for (int k = 0; k < n; ++k) f += alphabet[pick(rng)];
      }
    for (auto& r : rows) r[0] = "k" + r[0];
    std::ostringstream out;
    for (const auto& r : rows) csv::write_row(out, r);
    std::istringstream in(out.str());
    CHECK(csv::read(in) == rows);
  }
}

TEST_CASE("fixture census") {
  const Dataset& ds = fixture();
  CHECK(ds.unique_trial_count() == 41);
  CHECK(ds.comparison_count() == 43);
  CHECK(ds.indications().size() == 7);
  CHECK(ds.reports().size() == 100);
  CHECK(std::is_sorted(ds.reports().begin(), ds.reports().end(), report_order));
  for (const auto& r : ds.reports()) CHECK(ds.find(r.key) != nullptr);
  const auto* ribbon = ds.find({"RIBBON-1", std::string("TAX")});
  REQUIRE(ribbon != nullptr);
  CHECK(ribbon->indication == Indication::BRE);
}

TEST_CASE("exactly one final report per comparison and outcome when reported") {
  const Dataset& ds = fixture();
  std::map<std::pair<std::string, Outcome>, int> finals;
  for (const auto& r : ds.reports())
    if (r.is_final) ++finals[{r.key.label(), r.outcome}];
  for (const auto& [k, n] : finals) CHECK(n == 1);
}

TEST_CASE("dataset csv round-trip") {
  const Dataset& ds = fixture();
  std::ostringstream t, o;
  write_trials_csv(t, ds);
  write_outcomes_csv(o, ds);
  std::istringstream ti(t.str()), oi(o.str());
  CHECK(load_dataset(ti, oi) == ds);
}

TEST_CASE("reports_for filters and keeps canonical order") {
  const Dataset& ds = fixture();
  const auto col = reports_for(ds, Indication::COL, Outcome::OS, Date(2004, 12, 31));
  CHECK(!col.empty());
  for (const auto& r : col) {
    CHECK(ds.trial_of(r).indication == Indication::COL);
    CHECK(r.outcome == Outcome::OS);
    CHECK(r.cutoff_date <= Date(2004, 12, 31));
  }
  CHECK(std::is_sorted(col.begin(), col.end(), report_order));
}

TEST_CASE("validation collects every issue with its row") {
  const std::string trials = std::string(kTrialsHeader) +
                             "T1,,COL,2000-01-01,,CHM,100,100\n"
                             "T1,,COL,2000-01-01,,CHM,100,100\n"
                             "T2,,LUNG,2000-01-01,,CHM,100,100\n"
                             "T3,,COL,2000-02-30,,CHM,0,100\n"
                             "T4,,COL,2005-01-01,2004-01-01,CHM,10,10\n";
  const std::string outcomes = std::string(kOutcomesHeader) +
                               "T1,,OS,2003-01-01,0.8,0.9,1.1,,,true,\n"
                               "T9,,OS,2003-01-01,0.8,0.7,0.9,,,true,\n"
                               "T1,,PFS,2003-01-01,0.8,0.7,0.9,150,,true,\n"
                               "T1,,PFS,2003-01-01,0.8,0.7,0.9,,,true,\n"
                               "T1,,OS,2004-01-01,0.8,0.7,0.9,,,maybe,\n";
  const auto v = issues_of(trials, outcomes);
  CHECK(has_issue(v, ErrorCode::DuplicateTrial, 3));
  CHECK(has_issue(v, ErrorCode::BadValue, 4));
  CHECK(has_issue(v, ErrorCode::BadDate, 5));
  CHECK(has_issue(v, ErrorCode::BadValue, 5));
  CHECK(has_issue(v, ErrorCode::BadDate, 6));
  CHECK(has_issue(v, ErrorCode::CiOrderViolation, 2));
  CHECK(has_issue(v, ErrorCode::DanglingReport, 3));
  CHECK(has_issue(v, ErrorCode::BadValue, 4));
  CHECK(has_issue(v, ErrorCode::DuplicateReport, 5));
  CHECK(has_issue(v, ErrorCode::BadValue, 6));
  for (const auto& i : v) CHECK(!i.describe().empty());
}

TEST_CASE("missing column is reported at the header row") {
  const auto v = issues_of("trial_id,indication\nT1,COL\n", kOutcomesHeader);
  REQUIRE(!v.empty());
  CHECK(v.front().code == ErrorCode::MissingColumn);
  CHECK(v.front().row == 1);
}

TEST_CASE("two final reports of one outcome are rejected") {
  const std::string trials = std::string(kTrialsHeader) + "T1,,COL,2000-01-01,,CHM,100,100\n";
  const std::string outcomes = std::string(kOutcomesHeader) +
                               "T1,,OS,2003-01-01,0.8,0.7,0.9,,,true,\n"
                               "T1,,OS,2004-01-01,0.8,0.7,0.9,,,true,\n";
  const auto v = issues_of(trials, outcomes);
  CHECK(std::any_of(v.begin(), v.end(), [](const ValidationIssue& i) { return i.code == ErrorCode::DuplicateReport; }));
}

TEST_CASE("missing files raise Io") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/trials.csv", "/nonexistent/outcomes.csv"), Error);
  try {
    load_dataset("/nonexistent/trials.csv", "/nonexistent/outcomes.csv");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

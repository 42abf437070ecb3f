#ifndef EVIMAP_DATASET_HPP
#define EVIMAP_DATASET_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evimap/core.hpp"

namespace evimap {

/// Identifies one randomized comparison: a trial, or one independent
/// two-arm sub-trial of a multi-arm trial.
struct ComparisonKey {
  std::string trial_id;
  std::optional<std::string> subtrial_id;

  /// "TRIAL" or "TRIAL/SUB".
  std::string label() const;
  auto operator<=>(const ComparisonKey&) const = default;
  bool operator==(const ComparisonKey&) const = default;
};

struct TrialRecord {
  ComparisonKey key;
  Indication indication{};
  Date start_date;
  std::optional<Date> end_date;
  ComparatorClass comparator_class{};
  int n_control = 0;
  int n_comparator = 0;  // bevacizumab arm

  int n_total() const { return n_control + n_comparator; }
  bool operator==(const TrialRecord&) const = default;
};

struct OutcomeReport {
  ComparisonKey key;
  Outcome outcome{};
  Date cutoff_date;
  double hr = 1.0;
  double ci_lower = 1.0;
  double ci_upper = 1.0;
  std::optional<int> events_control;
  std::optional<int> events_comparator;
  bool is_final = false;
  std::optional<AssessmentMethod> assessment_method;

  bool operator==(const OutcomeReport&) const = default;
};

/// One problem found while loading; row is 1-based including the header
/// (the first data row is row 2), 0 when the issue is file-level.
struct ValidationIssue {
  ErrorCode code;
  std::string file;
  int row = 0;
  std::string column;
  std::string message;

  std::string describe() const;
};

/// Thrown by load_dataset / Dataset::build with every issue found in one pass.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// Validated, immutable evidence base. Safe to share read-only across threads.
class Dataset {
 public:
  Dataset() = default;

  /// Validates every invariant; throws ValidationError listing all violations.
  static Dataset build(std::vector<TrialRecord> trials, std::vector<OutcomeReport> reports);

  const std::vector<TrialRecord>& trials() const { return trials_; }
  /// All reports in canonical order (cutoff, trial id, subtrial, outcome).
  const std::vector<OutcomeReport>& reports() const { return reports_; }

  const TrialRecord* find(const ComparisonKey& key) const;
  const TrialRecord& trial_of(const OutcomeReport& r) const;

  std::size_t comparison_count() const { return trials_.size(); }
  std::size_t unique_trial_count() const;
  std::vector<Indication> indications() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<TrialRecord> trials_;
  std::vector<OutcomeReport> reports_;
};

/// Strict weak order used for every report listing: cutoff_date ascending,
/// then trial_id, subtrial_id, outcome.
bool report_order(const OutcomeReport& a, const OutcomeReport& b);

Dataset load_dataset(const std::string& trials_path, const std::string& outcomes_path);
Dataset load_dataset(std::istream& trials, std::istream& outcomes);

void write_trials_csv(std::ostream& out, const Dataset& ds);
void write_outcomes_csv(std::ostream& out, const Dataset& ds);

/// Reports of one indication/outcome with cutoff_date <= as_of (all when
/// as_of is absent), in canonical order.
std::vector<OutcomeReport> reports_for(const Dataset& ds, Indication indication, Outcome outcome,
                                       std::optional<Date> as_of = std::nullopt);

}  // namespace evimap

#endif  // EVIMAP_DATASET_HPP

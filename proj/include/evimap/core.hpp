#ifndef EVIMAP_CORE_HPP
#define EVIMAP_CORE_HPP

#include <array>
#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evimap {

enum class Indication { COL, REN, BRE, NSCLC, OFTPP, CER, GLIO };
enum class Outcome { OS, PFS };
enum class ComparatorClass { CHM, PBO, TAR, IMM, HOR, RAD };
enum class AssessmentMethod { IRC, IRF, INV };

inline constexpr std::array<Indication, 7> kAllIndications{
    Indication::COL,   Indication::REN, Indication::BRE,  Indication::NSCLC,
    Indication::OFTPP, Indication::CER, Indication::GLIO};
inline constexpr std::array<Outcome, 2> kAllOutcomes{Outcome::OS, Outcome::PFS};

std::string_view to_string(Indication v);
std::string_view to_string(Outcome v);
std::string_view to_string(ComparatorClass v);
std::string_view to_string(AssessmentMethod v);

// Case-insensitive parsers; nullopt on unknown codes.
std::optional<Indication> parse_indication(std::string_view s);
std::optional<Outcome> parse_outcome(std::string_view s);
std::optional<ComparatorClass> parse_comparator_class(std::string_view s);
std::optional<AssessmentMethod> parse_assessment_method(std::string_view s);

/// Long display name, e.g. "Colorectal cancer".
std::string_view display_name(Indication v);

/// Calendar date. Month/year-only sources are materialised as the first of the
/// month before they reach the CSV files.
class Date {
 public:
  Date() = default;
  constexpr explicit Date(std::chrono::year_month_day ymd) : ymd_(ymd) {}
  Date(int y, unsigned m, unsigned d);

  /// Strict YYYY-MM-DD; nullopt when malformed or not a real calendar day.
  static std::optional<Date> parse_iso(std::string_view s);
  static Date year_end(int year) { return Date(year, 12, 31); }

  int year() const { return static_cast<int>(ymd_.year()); }
  unsigned month() const { return static_cast<unsigned>(ymd_.month()); }
  unsigned day() const { return static_cast<unsigned>(ymd_.day()); }

  /// Days since 1970-01-01.
  long days() const;
  /// Year plus fraction of the year elapsed; used as the timeline x coordinate.
  double decimal_year() const;

  std::string iso() const;

  auto operator<=>(const Date&) const = default;
  bool operator==(const Date&) const = default;

 private:
  std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::month{1},
                                   std::chrono::day{1}};
};

enum class ErrorCode {
  MissingColumn,
  BadDate,
  BadValue,
  CiOrderViolation,
  DanglingReport,
  DuplicateReport,
  DuplicateTrial,
  DegenerateInterval,
  NullEffect,
  UnknownKey,
  NonConvergence,
  EmptyIndication,
  LengthMismatch,
  TooFewChains,
  TooFewDraws,
  NoEvidence,
  MissingDraws,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode c);

/// Base exception for the library; carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace evimap

#endif  // EVIMAP_CORE_HPP

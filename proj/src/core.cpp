#include "evimap/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace evimap {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const std::array<E, N>& values) {
  for (E v : values)
    if (iequals(s, to_string(v))) return v;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Indication v) {
  switch (v) {
    case Indication::COL: return "COL";
    case Indication::REN: return "REN";
    case Indication::BRE: return "BRE";
    case Indication::NSCLC: return "NSCLC";
    case Indication::OFTPP: return "OFTPP";
    case Indication::CER: return "CER";
    case Indication::GLIO: return "GLIO";
  }
  return "?";
}

std::string_view display_name(Indication v) {
  switch (v) {
    case Indication::COL: return "Colorectal cancer";
    case Indication::REN: return "Renal cell carcinoma";
    case Indication::BRE: return "Breast cancer";
    case Indication::NSCLC: return "NSCLC";
    case Indication::OFTPP: return "Ovarian, fallopian tube and primary peritoneal cancer";
    case Indication::CER: return "Cervical cancer";
    case Indication::GLIO: return "Glioblastoma";
  }
  return "?";
}

std::string_view to_string(Outcome v) { return v == Outcome::OS ? "OS" : "PFS"; }

std::string_view to_string(ComparatorClass v) {
  switch (v) {
    case ComparatorClass::CHM: return "CHM";
    case ComparatorClass::PBO: return "PBO";
    case ComparatorClass::TAR: return "TAR";
    case ComparatorClass::IMM: return "IMM";
    case ComparatorClass::HOR: return "HOR";
    case ComparatorClass::RAD: return "RAD";
  }
  return "?";
}

std::string_view to_string(AssessmentMethod v) {
  switch (v) {
    case AssessmentMethod::IRC: return "IRC";
    case AssessmentMethod::IRF: return "IRF";
    case AssessmentMethod::INV: return "INV";
  }
  return "?";
}

std::optional<Indication> parse_indication(std::string_view s) {
  return parse_enum(s, kAllIndications);
}
std::optional<Outcome> parse_outcome(std::string_view s) { return parse_enum(s, kAllOutcomes); }
std::optional<ComparatorClass> parse_comparator_class(std::string_view s) {
  return parse_enum(s, std::array{ComparatorClass::CHM, ComparatorClass::PBO, ComparatorClass::TAR,
                                  ComparatorClass::IMM, ComparatorClass::HOR, ComparatorClass::RAD});
}
std::optional<AssessmentMethod> parse_assessment_method(std::string_view s) {
  return parse_enum(s,
                    std::array{AssessmentMethod::IRC, AssessmentMethod::IRF, AssessmentMethod::INV});
}

std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::BadDate: return "BadDate";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::CiOrderViolation: return "CiOrderViolation";
    case ErrorCode::DanglingReport: return "DanglingReport";
    case ErrorCode::DuplicateReport: return "DuplicateReport";
    case ErrorCode::DuplicateTrial: return "DuplicateTrial";
    case ErrorCode::DegenerateInterval: return "DegenerateInterval";
    case ErrorCode::NullEffect: return "NullEffect";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::EmptyIndication: return "EmptyIndication";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewChains: return "TooFewChains";
    case ErrorCode::TooFewDraws: return "TooFewDraws";
    case ErrorCode::NoEvidence: return "NoEvidence";
    case ErrorCode::MissingDraws: return "MissingDraws";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "?";
}

Date::Date(int y, unsigned m, unsigned d)
    : ymd_(std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}) {
  if (!ymd_.ok()) throw Error(ErrorCode::BadDate, "invalid calendar date");
}

std::optional<Date> Date::parse_iso(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    std::from_chars(s.data() + pos, s.data() + pos + len, v);
    return v;
  };
  auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (!y || !m || !d) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{*y},
                                  std::chrono::month{static_cast<unsigned>(*m)},
                                  std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date(ymd);
}

long Date::days() const {
  return std::chrono::sys_days(ymd_).time_since_epoch().count();
}

double Date::decimal_year() const {
  const long start = Date(year(), 1, 1).days();
  const long next = Date(year() + 1, 1, 1).days();
  return year() + static_cast<double>(days() - start) / static_cast<double>(next - start);
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

}  // namespace evimap

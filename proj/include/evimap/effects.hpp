#ifndef EVIMAP_EFFECTS_HPP
#define EVIMAP_EFFECTS_HPP

#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "evimap/core.hpp"
#include "evimap/dataset.hpp"

namespace evimap {

/// Two-sided 95% normal quantile used for every CI <-> SE conversion.
/// Fixed at 1.959964 rather than 1.96 so that CI -> SE -> CI reproduces the
/// reported bounds to six significant figures.
inline constexpr double kZ95 = 1.959964;

/// Log hazard ratio and its standard error.
template <typename Scalar = double>
struct EffectEstimate {
  Scalar ln_hr{0};
  Scalar se{1};

  Scalar ci_lower() const { return std::exp(ln_hr - Scalar(kZ95) * se); }
  Scalar ci_upper() const { return std::exp(ln_hr + Scalar(kZ95) * se); }
};

template <typename Scalar>
EffectEstimate<Scalar> effect_from_hr_ci(Scalar hr, Scalar ci_lower, Scalar ci_upper) {
  using std::log;
  if (!(hr > 0) || !(ci_lower > 0) || !(ci_upper > 0))
    throw Error(ErrorCode::InvalidArgument, "hazard ratio and bounds must be positive");
  if (ci_lower > hr || hr > ci_upper)
    throw Error(ErrorCode::CiOrderViolation, "expected ci_lower <= hr <= ci_upper");
  if (ci_lower == ci_upper) throw Error(ErrorCode::DegenerateInterval, "ci_lower == ci_upper");
  return {log(hr), (log(ci_upper) - log(ci_lower)) / (Scalar(2) * Scalar(kZ95))};
}

inline EffectEstimate<double> effect_of(const OutcomeReport& r) {
  return effect_from_hr_ci(r.hr, r.ci_lower, r.ci_upper);
}

/// Vectorised form: rows of (hr, lower, upper) -> (ln_hr, se) columns.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 2> effects_from_hr_ci(
    const Eigen::MatrixBase<Derived>& hr_lower_upper) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> out(hr_lower_upper.rows(), 2);
  for (Eigen::Index i = 0; i < hr_lower_upper.rows(); ++i) {
    const auto e = effect_from_hr_ci<Scalar>(hr_lower_upper(i, 0), hr_lower_upper(i, 1),
                                             hr_lower_upper(i, 2));
    out(i, 0) = e.ln_hr;
    out(i, 1) = e.se;
  }
  return out;
}

/// Events divided by patients randomised in the arm.
template <typename Scalar = double>
Scalar maturity(int events, int n_total) {
  if (n_total < 1) throw Error(ErrorCode::InvalidArgument, "n_total must be positive");
  if (events < 0 || events > n_total)
    throw Error(ErrorCode::InvalidArgument, "events must lie in [0, n_total]");
  return static_cast<Scalar>(events) / static_cast<Scalar>(n_total);
}

template <typename Scalar>
Scalar ci_width(Scalar ci_lower, Scalar ci_upper) {
  if (!(ci_lower < ci_upper)) throw Error(ErrorCode::DegenerateInterval, "ci_lower >= ci_upper");
  return ci_upper - ci_lower;
}

/// SE / |ln HR|; NullEffect when the HR is exactly one.
template <typename Scalar>
Scalar relative_uncertainty(const EffectEstimate<Scalar>& e) {
  using std::abs;
  if (e.ln_hr == Scalar(0)) throw Error(ErrorCode::NullEffect, "ln(HR) is zero");
  return e.se / abs(e.ln_hr);
}

// ---------------------------------------------------------------------------
// Display bins for the size-weighted timeline markers.

enum class BinKey { MATURITY_OS, MATURITY_PFS, CI_WIDTH, REL_UNC };

std::string_view to_string(BinKey k);
/// Case-insensitive.
std::optional<BinKey> parse_bin_key(std::string_view s);

/// Bin index >= 1, or the EXTREME sentinel for values beyond the key's
/// extreme threshold (rendered as a plain point).
struct SizeBin {
  static constexpr int kExtreme = -1;

  int index = 1;
  std::vector<double> edges;

  bool extreme() const { return index == kExtreme; }
  bool operator==(const SizeBin&) const = default;
};

struct BinKeyDef {
  std::vector<double> edges;       // strictly increasing, half-open [e_k, e_{k+1})
  std::optional<double> extreme;   // values strictly above map to EXTREME
  int bin_count() const { return static_cast<int>(edges.size()) + 1; }
};

const BinKeyDef& bin_key_def(BinKey key);
/// Values are compared against the edges at 1e-9 resolution.

SizeBin assign_bin(double value, BinKey key);
/// String-keyed overload; throws UnknownKey for anything but the four keys.
SizeBin assign_bin(double value, std::string_view key);

/// Marker radius for a bin: r0 * (1 + 0.6 * (bin - 1)).
double bin_radius(const SizeBin& bin, double r0);

/// All derived metrics for one report, as emitted by the `metrics` CSV.
struct ReportMetrics {
  EffectEstimate<double> effect;
  double ci_width = 0;
  std::optional<double> rel_uncertainty;
  std::optional<double> maturity_control;
  std::optional<double> maturity_comparator;
  SizeBin ci_width_bin;
  SizeBin rel_unc_bin;
  std::optional<SizeBin> maturity_control_bin;
  std::optional<SizeBin> maturity_comparator_bin;
};

ReportMetrics compute_metrics(const Dataset& ds, const OutcomeReport& r);

}  // namespace evimap

#endif  // EVIMAP_EFFECTS_HPP

#include "evimap/effects.hpp"

#include <algorithm>
#include <cctype>

namespace evimap {

std::string_view to_string(BinKey k) {
  switch (k) {
    case BinKey::MATURITY_OS: return "MATURITY_OS";
    case BinKey::MATURITY_PFS: return "MATURITY_PFS";
    case BinKey::CI_WIDTH: return "CI_WIDTH";
    case BinKey::REL_UNC: return "REL_UNC";
  }
  return "?";
}

std::optional<BinKey> parse_bin_key(std::string_view s) {
  for (auto k : {BinKey::MATURITY_OS, BinKey::MATURITY_PFS, BinKey::CI_WIDTH, BinKey::REL_UNC})
    if (std::equal(s.begin(), s.end(), to_string(k).begin(), to_string(k).end(), [](char a, char b) {
          return std::toupper(static_cast<unsigned char>(a)) == b;
        }))
      return k;
  return std::nullopt;
}

const BinKeyDef& bin_key_def(BinKey key) {
  // Half-open at each edge.
  static const BinKeyDef maturity_os{{0.25, 0.40, 0.55, 0.70}, std::nullopt};
  static const BinKeyDef maturity_pfs{{0.25, 0.45, 0.65, 0.85}, std::nullopt};
  static const BinKeyDef width{{0.25, 0.45, 0.65}, 1.00};
  static const BinKeyDef rel{{0.25, 0.45, 0.65, 1.00}, 1.50};
  switch (key) {
    case BinKey::MATURITY_OS: return maturity_os;
    case BinKey::MATURITY_PFS: return maturity_pfs;
    case BinKey::CI_WIDTH: return width;
    case BinKey::REL_UNC: return rel;
  }
  throw Error(ErrorCode::UnknownKey, "unknown bin key");
}

SizeBin assign_bin(double value, BinKey key) {
  const auto& def = bin_key_def(key);
  // Compare at 1e-9 resolution.
  value = std::round(value * 1e9) / 1e9;
  if (def.extreme && value > *def.extreme) return {SizeBin::kExtreme, def.edges};
  const auto above = std::upper_bound(def.edges.begin(), def.edges.end(), value);
  return {static_cast<int>(above - def.edges.begin()) + 1, def.edges};
}

SizeBin assign_bin(double value, std::string_view key) {
  const auto k = parse_bin_key(key);
  if (!k) throw Error(ErrorCode::UnknownKey, "unknown bin key '" + std::string(key) + "'");
  return assign_bin(value, *k);
}

double bin_radius(const SizeBin& bin, double r0) {
  if (bin.extreme()) return r0 * 0.5;
  return r0 * (1.0 + 0.6 * (bin.index - 1));
}

ReportMetrics compute_metrics(const Dataset& ds, const OutcomeReport& r) {
  const TrialRecord& t = ds.trial_of(r);
  ReportMetrics m;
  m.effect = effect_of(r);
  m.ci_width = ci_width(r.ci_lower, r.ci_upper);
  if (m.effect.ln_hr != 0.0) m.rel_uncertainty = relative_uncertainty(m.effect);
  m.ci_width_bin = assign_bin(m.ci_width, BinKey::CI_WIDTH);
  // HR exactly 1 has no relative uncertainty; it is displayed as EXTREME.
  m.rel_unc_bin = m.rel_uncertainty ? assign_bin(*m.rel_uncertainty, BinKey::REL_UNC)
                                    : SizeBin{SizeBin::kExtreme, bin_key_def(BinKey::REL_UNC).edges};
  const BinKey mkey = r.outcome == Outcome::OS ? BinKey::MATURITY_OS : BinKey::MATURITY_PFS;
  if (r.events_control) {
    m.maturity_control = maturity(*r.events_control, t.n_control);
    m.maturity_control_bin = assign_bin(*m.maturity_control, mkey);
  }
  if (r.events_comparator) {
    m.maturity_comparator = maturity(*r.events_comparator, t.n_comparator);
    m.maturity_comparator_bin = assign_bin(*m.maturity_comparator, mkey);
  }
  return m;
}

}  // namespace evimap

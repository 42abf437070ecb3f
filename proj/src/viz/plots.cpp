#include "evimap/viz/plots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace evimap::viz {

namespace {

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const std::array<E, N>& all) {
  std::string up(s);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::replace(up.begin(), up.end(), '-', '_');
  for (auto e : all)
    if (up == to_string(e)) return e;
  return std::nullopt;
}

constexpr std::array kVariants{TimelineVariant::PLAIN,         TimelineVariant::SIZE,
                               TimelineVariant::UNCERTAINTY,   TimelineVariant::UNCERTAINTY_REL,
                               TimelineVariant::MATURITY_OS,   TimelineVariant::MATURITY_PFS};
constexpr std::array kOrders{RidgelineOrder::BY_YEAR, RidgelineOrder::BY_EFFECT};
constexpr std::array kModes{SynthMode::IP_VS_STUDY, SynthMode::MODEL_COMPARE};

}  // namespace

std::string_view to_string(TimelineVariant v) {
  switch (v) {
    case TimelineVariant::PLAIN: return "PLAIN";
    case TimelineVariant::SIZE: return "SIZE";
    case TimelineVariant::UNCERTAINTY: return "UNCERTAINTY";
    case TimelineVariant::UNCERTAINTY_REL: return "UNCERTAINTY_REL";
    case TimelineVariant::MATURITY_OS: return "MATURITY_OS";
    case TimelineVariant::MATURITY_PFS: return "MATURITY_PFS";
  }
  return "?";
}
std::optional<TimelineVariant> parse_timeline_variant(std::string_view s) { return parse_enum(s, kVariants); }

std::string_view to_string(RidgelineOrder o) {
  return o == RidgelineOrder::BY_YEAR ? "BY_YEAR" : "BY_EFFECT";
}
std::optional<RidgelineOrder> parse_ridgeline_order(std::string_view s) { return parse_enum(s, kOrders); }

std::string_view to_string(SynthMode m) {
  return m == SynthMode::IP_VS_STUDY ? "IP_VS_STUDY" : "MODEL_COMPARE";
}
std::optional<SynthMode> parse_synth_mode(std::string_view s) { return parse_enum(s, kModes); }

std::vector<Indication> chronological_indications(const Dataset& ds) {
  std::map<Indication, Date> first;
  for (const auto& t : ds.trials()) {
    auto it = first.find(t.indication);
    if (it == first.end() || t.start_date < it->second) first[t.indication] = t.start_date;
  }
  std::vector<Indication> out;
  for (const auto& [ind, d] : first) out.push_back(ind);
  std::stable_sort(out.begin(), out.end(),
                   [&](Indication a, Indication b) { return first.at(a) < first.at(b); });
  return out;
}

std::vector<std::pair<Date, double>> display_positions(std::vector<Date> dates) {
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
  std::vector<std::pair<Date, double>> out;
  double prev_days = 0;
  for (std::size_t k = 0; k < dates.size(); ++k) {
    const auto days = static_cast<double>(dates[k].days());
    double shown = days;
    if (k > 0 && days - prev_days < kOverlapDays) shown = prev_days + kOverlapDays;
    out.emplace_back(dates[k], dates[k].decimal_year() + (shown - days) / 365.25);
    prev_days = shown;
  }
  return out;
}

namespace {

std::string dash_for(ComparatorClass c) {
  switch (c) {
    case ComparatorClass::CHM: return "";
    case ComparatorClass::PBO: return "6,3";
    case ComparatorClass::TAR: return "2,2";
    case ComparatorClass::IMM: return "8,2,2,2";
    case ComparatorClass::HOR: return "4,4";
    case ComparatorClass::RAD: return "1,3";
  }
  return "";
}

Style stroke_style(std::string_view colour, double width = 1.0) {
  Style s;
  s.stroke = std::string(colour);
  s.stroke_width = width;
  return s;
}

Style fill_style(std::string_view colour, double opacity) {
  Style s;
  s.stroke = std::string(colour);
  s.fill = std::string(colour);
  s.fill_opacity = opacity;
  return s;
}

/// Uncertainty circles grow with precision: the lowest-uncertainty bin gets
/// the largest radius.
double precision_radius(const SizeBin& bin, double r0) {
  const int bins = static_cast<int>(bin.edges.size()) + 1;
  return r0 * (1.0 + 0.6 * (bins - bin.index));
}

Mark plain_marker(const OutcomeReport& r, Point at, double r0) {
  const bool os = r.outcome == Outcome::OS;
  const auto col = os ? colour::kOs : colour::kPfs;
  Mark m;
  m.points = {at};
  m.radius = r0;
  if (r.is_final) {
    m.kind = MarkKind::FINAL_CROSS;
    m.style = stroke_style(col, 1.2);
  } else {
    m.kind = os ? MarkKind::OS_CIRCLE : MarkKind::PFS_CIRCLE;
    m.style = stroke_style(col);
    m.style.fill = "#FFFFFF";
  }
  return m;
}

Mark report_marker(const Dataset& ds, const OutcomeReport& r, Point at, TimelineVariant v, double r0) {
  const bool os = r.outcome == Outcome::OS;
  const auto col = os ? colour::kOs : colour::kPfs;
  switch (v) {
    case TimelineVariant::PLAIN:
    case TimelineVariant::SIZE: return plain_marker(r, at, r0);
    case TimelineVariant::UNCERTAINTY:
    case TimelineVariant::UNCERTAINTY_REL: {
      const auto metrics = compute_metrics(ds, r);
      const SizeBin bin = v == TimelineVariant::UNCERTAINTY ? metrics.ci_width_bin : metrics.rel_unc_bin;
      Mark m;
      m.points = {at};
      if (bin.extreme()) {
        m.kind = MarkKind::EXTREME_POINT;
        m.radius = 1.5;
        m.style = fill_style(col, 1.0);
      } else {
        m.kind = os ? MarkKind::OS_CIRCLE : MarkKind::PFS_CIRCLE;
        m.size_bin = bin;
        m.radius = precision_radius(bin, r0);
        m.style = fill_style(col, 0.45);
      }
      return m;
    }
    case TimelineVariant::MATURITY_OS:
    case TimelineVariant::MATURITY_PFS: {
      const Outcome target = v == TimelineVariant::MATURITY_OS ? Outcome::OS : Outcome::PFS;
      if (r.outcome != target) return plain_marker(r, at, r0);
      const auto metrics = compute_metrics(ds, r);
      Mark m;
      m.points = {at};
      if (metrics.maturity_comparator_bin && metrics.maturity_control_bin) {
        m.kind = MarkKind::MATURITY_CIRCLE_PAIR;
        m.size_bin = *metrics.maturity_comparator_bin;
        m.secondary_bin = *metrics.maturity_control_bin;
        m.radius = bin_radius(*m.size_bin, r0);
        m.radius2 = bin_radius(*m.secondary_bin, r0);
        m.style = fill_style(colour::kOs, 0.35);
        m.style2 = fill_style(colour::kComparator, 0.35);
      } else {
        m.kind = MarkKind::FINAL_CROSS;
        m.radius = r0;
        m.style = stroke_style(col, 1.2);
      }
      return m;
    }
  }
  return plain_marker(r, at, r0);
}

Axis year_axis(double lo, double hi) {
  Axis a;
  a.min = std::floor(lo);
  a.max = std::ceil(hi + 1e-9);
  if (a.max <= a.min) a.max = a.min + 1;
  for (int y = static_cast<int>(a.min); y <= static_cast<int>(a.max); ++y) {
    if (y % 2 != 0) continue;
    a.ticks.push_back(y);
    a.tick_labels.push_back(std::to_string(y));
  }
  a.label = "Year";
  return a;
}

Axis lnhr_axis(double lo, double hi) {
  Axis a;
  a.min = std::max(-2.5, std::floor(lo * 4) / 4);
  a.max = std::min(2.5, std::ceil(hi * 4) / 4);
  if (a.max <= a.min) a.max = a.min + 0.5;
  const double step = (a.max - a.min) > 2.0 ? 0.5 : 0.25;
  for (double t = std::ceil(a.min / step) * step; t <= a.max + 1e-9; t += step) {
    const double v = std::abs(t) < 1e-12 ? 0.0 : t;
    a.ticks.push_back(v);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    a.tick_labels.push_back(buf);
  }
  a.label = "ln(HR)";
  if (a.min < 0 && a.max > 0) a.reference = 0.0;
  return a;
}

/// Ridgeline mark: curve points clipped to [xmin, xmax], lifted onto baseline.
Mark density_mark(DensityCurve curve, double baseline, double scale, const Axis& x, Style style,
                  std::string source, std::string text = {}) {
  Mark m;
  m.kind = MarkKind::DENSITY_CURVE;
  m.baseline = baseline;
  for (Eigen::Index i = 0; i < curve.xs.size(); ++i)
    if (x.contains(curve.xs(i))) m.points.push_back({curve.xs(i), baseline + curve.ys(i) * scale});
  m.curve = std::move(curve);
  m.style = std::move(style);
  m.source = std::move(source);
  m.text = std::move(text);
  return m;
}

std::vector<LegendEntry> timeline_legend(TimelineVariant v, double r0) {
  std::vector<LegendEntry> l;
  l.push_back({MarkKind::DURATION_LINE, stroke_style(colour::kOs), 0, "Bevacizumab + chemotherapy vs chemotherapy"});
  l.push_back({MarkKind::DURATION_LINE, stroke_style(colour::kOther), 0, "Other comparator"});
  switch (v) {
    case TimelineVariant::PLAIN:
    case TimelineVariant::SIZE:
      l.push_back({MarkKind::OS_CIRCLE, stroke_style(colour::kOs), r0, "Interim OS"});
      l.push_back({MarkKind::PFS_CIRCLE, stroke_style(colour::kPfs), r0, "Interim PFS"});
      l.push_back({MarkKind::FINAL_CROSS, stroke_style(colour::kOs), r0, "Final report"});
      break;
    case TimelineVariant::UNCERTAINTY:
    case TimelineVariant::UNCERTAINTY_REL: {
      const auto& def = bin_key_def(v == TimelineVariant::UNCERTAINTY ? BinKey::CI_WIDTH : BinKey::REL_UNC);
      for (int b = 1; b <= def.bin_count(); ++b)
        l.push_back({MarkKind::OS_CIRCLE, fill_style(colour::kOs, 0.45),
                     precision_radius(SizeBin{b, def.edges}, r0), "Uncertainty bin " + std::to_string(b)});
      l.push_back({MarkKind::PFS_CIRCLE, fill_style(colour::kPfs, 0.45), r0, "PFS"});
      l.push_back({MarkKind::EXTREME_POINT, fill_style(colour::kOs, 1.0), 1.5, "Extreme uncertainty"});
      break;
    }
    case TimelineVariant::MATURITY_OS:
    case TimelineVariant::MATURITY_PFS: {
      const auto& def =
          bin_key_def(v == TimelineVariant::MATURITY_OS ? BinKey::MATURITY_OS : BinKey::MATURITY_PFS);
      for (int b = 1; b <= def.bin_count(); ++b)
        l.push_back({MarkKind::MATURITY_CIRCLE_PAIR, fill_style(colour::kOs, 0.35),
                     bin_radius(SizeBin{b, def.edges}, r0), "Maturity bin " + std::to_string(b)});
      l.push_back({MarkKind::MATURITY_CIRCLE_PAIR, fill_style(colour::kComparator, 0.35), r0, "Comparator arm"});
      l.push_back({MarkKind::FINAL_CROSS, stroke_style(colour::kOs), r0, "Maturity not available"});
      break;
    }
  }
  return l;
}

}  // namespace

PlotSpec build_timeline(const Dataset& ds, TimelineVariant variant, const TimelineOptions& opts) {
  PlotSpec spec;
  spec.kind = PlotKind::TIMELINE;
  spec.title = "Evidence timeline";
  spec.legend = timeline_legend(variant, opts.r0);

  std::map<ComparisonKey, std::vector<const OutcomeReport*>> by_key;
  for (const auto& r : ds.reports()) by_key[r.key].push_back(&r);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Indication ind : chronological_indications(ds)) {
    Panel p;
    p.id = std::string(to_string(ind));
    p.title = std::string(display_name(ind));
    p.indication = ind;
    std::vector<const TrialRecord*> trials;
    for (const auto& t : ds.trials())
      if (t.indication == ind) trials.push_back(&t);
    std::sort(trials.begin(), trials.end(), [](auto* a, auto* b) {
      return std::tie(a->start_date, a->key) < std::tie(b->start_date, b->key);
    });
    const auto rows = static_cast<int>(trials.size());
    double first = std::numeric_limits<double>::infinity(), last = -first;
    for (int r = 0; r < rows; ++r) {
      const TrialRecord& t = *trials[r];
      const double y = rows - 1 - r;
      p.row_labels.emplace_back(y, t.key.label());
      const auto it = by_key.find(t.key);
      const auto reports = it == by_key.end() ? std::vector<const OutcomeReport*>{} : it->second;
      std::vector<Date> dates;
      for (const auto* rep : reports) dates.push_back(rep->cutoff_date);
      const auto pos = display_positions(dates);
      auto x_of = [&](Date d) {
        for (const auto& [date, x] : pos)
          if (date == d) return x;
        return d.decimal_year();
      };

      const bool chemo = t.comparator_class == ComparatorClass::CHM;
      const auto line_colour = chemo ? colour::kOs : colour::kOther;
      const double start = t.start_date.decimal_year();

      Mark sm;
      sm.points = {{start, y}};
      sm.source = t.key.label();
      if (variant == TimelineVariant::SIZE) {
        sm.kind = MarkKind::TRIAL_START_SQUARE;
        sm.radius = opts.r0 * std::clamp(std::sqrt(t.n_total() / 200.0), 0.5, 4.0);
        sm.style = fill_style(line_colour, 0.6);
      } else {
        sm.kind = MarkKind::TRIAL_START_TICK;
        sm.radius = opts.r0;
        sm.style = stroke_style(line_colour, 1.5);
      }
      p.marks.push_back(std::move(sm));

      const double line_from = pos.empty() ? start : pos.front().second;
      double line_to = pos.empty() ? start : pos.back().second;
      if (t.end_date) line_to = std::max(line_to, t.end_date->decimal_year());
      Mark line;
      line.kind = MarkKind::DURATION_LINE;
      line.points = {{line_from, y}, {line_to, y}};
      line.style = stroke_style(line_colour, 1.5);
      line.style.dash = dash_for(t.comparator_class);
      line.source = t.key.label();
      p.marks.push_back(std::move(line));

      if (!chemo) {
        Mark label;
        label.kind = MarkKind::LABEL;
        label.points = {{line_to, y}};
        label.text = std::string(to_string(t.comparator_class));
        label.style = stroke_style(colour::kOther);
        label.source = t.key.label();
        p.marks.push_back(std::move(label));
      }

      for (const auto* rep : reports) {
        const double dy = rep->outcome == Outcome::OS ? 0.18 : -0.18;
        Mark m = report_marker(ds, *rep, {x_of(rep->cutoff_date), y + dy}, variant, opts.r0);
        m.source = t.key.label() + "/" + std::string(to_string(rep->outcome)) + "/" + rep->cutoff_date.iso();
        p.marks.push_back(std::move(m));
      }
      first = std::min({first, start, line_from});
      last = std::max({last, line_to, start});
    }
    p.span_first = first;
    p.span_last = last;
    lo = std::min(lo, first);
    hi = std::max(hi, last);
    p.y.min = -0.5;
    p.y.max = std::max(rows, 1) - 0.5;
    spec.panels.push_back(std::move(p));
  }
  if (spec.panels.empty()) {
    lo = 2000;
    hi = 2001;
  }
  const Axis x = year_axis(lo, hi + 0.6);
  for (auto& p : spec.panels) p.x = x;
  spec.clamp_to_axes();
  return spec;
}

PlotSpec build_ridgeline(const Dataset& ds, RidgelineOrder order) {
  PlotSpec spec;
  spec.kind = PlotKind::RIDGELINE;
  spec.title = order == RidgelineOrder::BY_YEAR ? "Final reported ln(HR) by reporting year"
                                                : "Final reported ln(HR) ranked by OS";
  spec.legend = {{MarkKind::DENSITY_CURVE, fill_style(colour::kOs, 0.35), 0, "OS"},
                 {MarkKind::DENSITY_CURVE, fill_style(colour::kPfs, 0.35), 0, "PFS"}};

  struct Item {
    const OutcomeReport* report;
    EffectEstimate<double> effect;
  };
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::vector<std::pair<Indication, std::vector<Item>>> groups;
  for (Indication ind : chronological_indications(ds)) {
    std::vector<Item> items;
    for (const auto& r : ds.reports()) {
      if (!r.is_final || ds.trial_of(r).indication != ind) continue;
      const auto e = effect_of(r);
      items.push_back({&r, e});
      lo = std::min(lo, e.ln_hr - 2.5 * e.se);
      hi = std::max(hi, e.ln_hr + 2.5 * e.se);
    }
    groups.emplace_back(ind, std::move(items));
  }
  const Axis x = lnhr_axis(std::isfinite(lo) ? lo : -1.0, std::isfinite(hi) ? hi : 1.0);

  for (auto& [ind, items] : groups) {
    Panel p;
    p.id = std::string(to_string(ind));
    p.title = std::string(display_name(ind));
    p.indication = ind;
    p.x = x;
    std::vector<DensityCurve> curves;
    double peak = 0;
    for (const auto& it : items) {
      curves.push_back(normal_density(it.effect.ln_hr, it.effect.se));
      peak = std::max(peak, curves.back().peak());
    }
    const double scale = peak > 0 ? 1.2 / peak : 1.0;

    std::vector<double> baselines(items.size());
    if (order == RidgelineOrder::BY_YEAR) {
      std::map<int, int> used;
      int y0 = std::numeric_limits<int>::max(), y1 = std::numeric_limits<int>::min();
      for (std::size_t i = 0; i < items.size(); ++i) {
        const int year = items[i].report->cutoff_date.year();
        baselines[i] = year + 0.25 * used[year]++;
        y0 = std::min(y0, year);
        y1 = std::max(y1, year);
      }
      if (items.empty()) y0 = y1 = 2000;
      for (int y = y0; y <= y1; ++y) p.row_labels.emplace_back(y, std::to_string(y));
      p.y.min = y0 - 0.25;
      p.y.max = y1 + 1.75;
    } else {
      std::map<ComparisonKey, double> os_effect, pfs_effect;
      for (const auto& it : items)
        (it.report->outcome == Outcome::OS ? os_effect : pfs_effect)[it.report->key] = it.effect.ln_hr;
      std::vector<ComparisonKey> keys;
      for (const auto& it : items)
        if (std::find(keys.begin(), keys.end(), it.report->key) == keys.end()) keys.push_back(it.report->key);
      std::stable_sort(keys.begin(), keys.end(), [&](const ComparisonKey& a, const ComparisonKey& b) {
        const bool ha = os_effect.count(a), hb = os_effect.count(b);
        if (ha != hb) return ha;
        if (ha) {
          if (os_effect.at(a) != os_effect.at(b)) return os_effect.at(a) > os_effect.at(b);
        } else if (pfs_effect.count(a) && pfs_effect.count(b) && pfs_effect.at(a) != pfs_effect.at(b)) {
          return pfs_effect.at(a) > pfs_effect.at(b);
        }
        return a < b;
      });
      const auto n = static_cast<double>(keys.size());
      for (std::size_t i = 0; i < items.size(); ++i) {
        const auto rank = std::find(keys.begin(), keys.end(), items[i].report->key) - keys.begin();
        baselines[i] = n - 1 - static_cast<double>(rank);
      }
      for (std::size_t k = 0; k < keys.size(); ++k) p.row_labels.emplace_back(n - 1 - k, keys[k].label());
      p.y.min = -0.25;
      p.y.max = std::max(n, 1.0) + 0.75;
    }

    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& r = *items[i].report;
      const bool os = r.outcome == Outcome::OS;
      p.marks.push_back(density_mark(curves[i], baselines[i], scale, x,
                                     fill_style(os ? colour::kOs : colour::kPfs, 0.35),
                                     r.key.label() + "/" + std::string(to_string(r.outcome)),
                                     r.key.label()));
    }
    spec.panels.push_back(std::move(p));
  }
  spec.clamp_to_axes();
  return spec;
}

namespace {

const Vector& pooled_draws(const CumulativeRun& run, std::size_t t, ModelKind m) {
  const auto& c = run.cell(t, m);
  if (!c.ok())
    throw Error(ErrorCode::MissingDraws, "cell " + c.timepoint.iso() + "/" + std::string(to_string(m)) +
                                             " has no result: " + c.error);
  const auto it = c.result->pooled_effect.find(run.indication);
  if (it == c.result->pooled_effect.end() || it->second.draws.size() < kMinKdeDraws)
    throw Error(ErrorCode::MissingDraws,
                "cell " + c.timepoint.iso() + "/" + std::string(to_string(m)) + " lacks pooled draws");
  return it->second.draws;
}

std::string_view model_colour(ModelKind m) {
  switch (m) {
    case ModelKind::IP: return colour::kIp;
    case ModelKind::CP: return colour::kCp;
    case ModelKind::HMA: return colour::kHma;
  }
  return colour::kOs;
}

}  // namespace

PlotSpec build_synth_ridgeline(const CumulativeRun& run, SynthMode mode) {
  PlotSpec spec;
  spec.kind = PlotKind::SYNTH_RIDGELINE;
  spec.title = std::string(display_name(run.indication)) + " " + std::string(to_string(run.outcome)) +
               (mode == SynthMode::IP_VS_STUDY ? ": new study vs cumulative IP" : ": model comparison");
  if (mode == SynthMode::IP_VS_STUDY) {
    spec.legend = {{MarkKind::DENSITY_CURVE, fill_style(colour::kLight, 0.6), 0, "Newly reported study"},
                   {MarkKind::DENSITY_CURVE, fill_style(colour::kDark, 0.6), 0, "Cumulative IP posterior"}};
  } else {
    for (auto m : kAllModels)
      spec.legend.push_back({MarkKind::DENSITY_CURVE, fill_style(model_colour(m), 0.3), 0,
                             std::string(to_string(m))});
  }

  Panel p;
  p.id = std::string(to_string(run.indication)) + "-" + std::string(to_string(run.outcome));
  p.title = std::string(display_name(run.indication));
  p.indication = run.indication;
  const std::size_t T = run.timepoints.size();

  struct RowCurve {
    DensityCurve curve;
    Style style;
    std::string source, text;
  };
  std::vector<std::vector<RowCurve>> rows(T);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::set<std::pair<ComparisonKey, Date>> seen;
  for (std::size_t t = 0; t < T; ++t) {
    const std::string tp = run.timepoints[t].iso();
    const Vector& ip = pooled_draws(run, t, ModelKind::IP);
    lo = std::min(lo, quantile(ip, 0.025) - 0.2);
    hi = std::max(hi, quantile(ip, 0.975) + 0.2);
    std::string row_label = std::to_string(run.timepoints[t].year());
    if (mode == SynthMode::IP_VS_STUDY) {
      const auto& snap = run.cell(t, ModelKind::IP).snapshot;
      std::string names;
      for (std::size_t i = 0; i < snap.reports.size(); ++i) {
        const auto& r = snap.reports[i];
        if (!seen.insert({r.key, r.cutoff_date}).second) continue;
        const auto& d = snap.datapoints[i];
        lo = std::min(lo, d.y - 2 * d.sigma);
        hi = std::max(hi, d.y + 2 * d.sigma);
        rows[t].push_back({normal_density(d.y, d.sigma), fill_style(colour::kLight, 0.6),
                           tp + "/" + d.label, d.label});
        names += (names.empty() ? "" : ", ") + d.label;
      }
      rows[t].push_back({kde(ip), fill_style(colour::kDark, 0.6), tp + "/IP", "IP"});
      row_label += ": " + names;
    } else {
      for (auto m : kAllModels) {
        const Vector& draws = m == ModelKind::IP ? ip : pooled_draws(run, t, m);
        rows[t].push_back({kde(draws), fill_style(model_colour(m), 0.3), tp + "/" + std::string(to_string(m)),
                           std::string(to_string(m))});
      }
    }
    p.row_labels.emplace_back(static_cast<double>(T - 1 - t), row_label);
  }
  p.x = lnhr_axis(lo, hi);
  p.y.min = -0.25;
  p.y.max = static_cast<double>(std::max<std::size_t>(T, 1)) + 0.75;
  for (std::size_t t = 0; t < T; ++t) {
    double peak = 0;
    for (const auto& rc : rows[t]) peak = std::max(peak, rc.curve.peak());
    const double scale = peak > 0 ? 0.95 / peak : 1.0;
    for (auto& rc : rows[t])
      p.marks.push_back(density_mark(std::move(rc.curve), static_cast<double>(T - 1 - t), scale, p.x,
                                     rc.style, rc.source, rc.text));
  }
  spec.panels.push_back(std::move(p));
  spec.clamp_to_axes();
  return spec;
}

std::vector<ViolinInput> violin_inputs(const CumulativeRun& os, const CumulativeRun& pfs) {
  if (os.indication != pfs.indication || os.outcome != Outcome::OS || pfs.outcome != Outcome::PFS)
    throw Error(ErrorCode::InvalidArgument, "violin_inputs needs an OS and a PFS run of one indication");
  std::vector<ViolinInput> out;
  for (auto m : kAllModels) {
    ViolinInput v;
    v.indication = os.indication;
    v.model = m;
    v.os = pooled_draws(os, os.timepoints.size() - 1, m);
    v.pfs = pooled_draws(pfs, pfs.timepoints.size() - 1, m);
    out.push_back(std::move(v));
  }
  return out;
}

PlotSpec build_split_violin(const std::vector<ViolinInput>& inputs) {
  PlotSpec spec;
  spec.kind = PlotKind::SPLIT_VIOLIN;
  spec.title = "Final pooled ln(HR): OS (left) vs PFS (right)";
  spec.legend = {{MarkKind::VIOLIN_HALF, fill_style(colour::kOs, 0.35), 0, "OS"},
                 {MarkKind::VIOLIN_HALF, fill_style(colour::kPfs, 0.35), 0, "PFS"}};

  std::vector<Indication> order;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& in : inputs) {
    if (in.os.size() < kMinKdeDraws || in.pfs.size() < kMinKdeDraws)
      throw Error(ErrorCode::MissingDraws, std::string(to_string(in.indication)) + "/" +
                                               std::string(to_string(in.model)) + " lacks draws");
    if (std::find(order.begin(), order.end(), in.indication) == order.end()) order.push_back(in.indication);
    for (const Vector* v : {&in.os, &in.pfs}) {
      lo = std::min(lo, quantile(*v, 0.001));
      hi = std::max(hi, quantile(*v, 0.999));
    }
  }
  const Axis yaxis = lnhr_axis(std::isfinite(lo) ? lo : -1.0, std::isfinite(hi) ? hi : 1.0);
  Axis xaxis;
  xaxis.min = -0.5;
  xaxis.max = 2.5;
  for (auto m : kAllModels) {
    xaxis.ticks.push_back(static_cast<double>(m));
    xaxis.tick_labels.emplace_back(to_string(m));
  }
  xaxis.label = "Model";

  for (Indication ind : order) {
    Panel p;
    p.id = std::string(to_string(ind));
    p.title = std::string(display_name(ind));
    p.indication = ind;
    p.x = xaxis;
    p.y = yaxis;
    struct Half {
      DensityCurve curve;
      BoxStats box;
      double centre;
      int side;
      std::string source;
    };
    std::vector<Half> halves;
    for (const auto& in : inputs) {
      if (in.indication != ind) continue;
      const double centre = static_cast<double>(in.model);
      for (int side : {-1, 1}) {
        const Vector& draws = side < 0 ? in.os : in.pfs;
        Half h{kde(draws),
               {quantile(draws, 0.25), quantile(draws, 0.5), quantile(draws, 0.75)},
               centre,
               side,
               std::string(to_string(in.model)) + "/" + (side < 0 ? "OS" : "PFS")};
        halves.push_back(std::move(h));
      }
    }
    // Both halves of one violin share a scale so OS and PFS stay comparable.
    std::map<double, double> violin_peak;
    for (const auto& h : halves) violin_peak[h.centre] = std::max(violin_peak[h.centre], h.curve.peak());
    for (auto& h : halves) {
      const double scale = violin_peak[h.centre] > 0 ? 0.45 / violin_peak[h.centre] : 1.0;
      const auto col = h.side < 0 ? colour::kOs : colour::kPfs;
      Mark v;
      v.kind = MarkKind::VIOLIN_HALF;
      v.baseline = h.centre;
      v.side = h.side;
      for (Eigen::Index i = 0; i < h.curve.xs.size(); ++i)
        if (yaxis.contains(h.curve.xs(i)))
          v.points.push_back({h.centre + h.side * h.curve.ys(i) * scale, h.curve.xs(i)});
      v.style = fill_style(col, 0.35);
      v.source = h.source;
      v.box = h.box;
      v.curve = std::move(h.curve);
      Mark b;
      b.kind = MarkKind::BOXPLOT_OVERLAY;
      b.baseline = h.centre;
      b.side = h.side;
      b.box = h.box;
      b.points = {{h.centre, h.box.q1}, {h.centre + h.side * 0.06, h.box.q3}, {h.centre, h.box.median}};
      b.style = fill_style(col, 0.8);
      b.source = h.source;
      p.marks.push_back(std::move(v));
      p.marks.push_back(std::move(b));
    }
    spec.panels.push_back(std::move(p));
  }
  spec.clamp_to_axes();
  return spec;
}

}  // namespace evimap::viz

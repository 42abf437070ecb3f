#include "evimap/viz/svg.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace evimap::viz {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string esc(std::string_view in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string style_attrs(const Style& s) {
  std::string a = " stroke=\"" + esc(s.stroke) + "\" stroke-width=\"" + num(s.stroke_width) + "\" fill=\"" +
                  esc(s.fill) + "\"";
  if (s.fill != "none" && s.fill_opacity < 1.0) a += " fill-opacity=\"" + num(s.fill_opacity) + "\"";
  if (!s.dash.empty()) a += " stroke-dasharray=\"" + esc(s.dash) + "\"";
  return a;
}

struct Frame {
  double left, top, width, height;
  Axis x, y;

  double px(double v) const { return left + (v - x.min) / (x.max - x.min) * width; }
  double py(double v) const { return top + (y.max - v) / (y.max - y.min) * height; }
};

double panel_height(const PlotSpec& spec, const Panel& p, const SvgOptions& o) {
  const double span = p.y.max - p.y.min;
  switch (spec.kind) {
    case PlotKind::TIMELINE: return std::max(1.0, span) * o.timeline_row;
    case PlotKind::RIDGELINE:
    case PlotKind::SYNTH_RIDGELINE: return std::max(1.0, span) * o.ridge_row;
    case PlotKind::SPLIT_VIOLIN: return o.violin_height;
  }
  return 100;
}

void axes(std::ostringstream& s, const Frame& f, const Panel& p) {
  s << "<g class=\"axis\">\n";
  s << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width)
    << "\" height=\"" << num(f.height) << "\" fill=\"none\" stroke=\"#CCCCCC\"/>\n";
  const double base = f.top + f.height;
  for (std::size_t i = 0; i < p.x.ticks.size(); ++i) {
    const double x = f.px(p.x.ticks[i]);
    s << "<line x1=\"" << num(x) << "\" y1=\"" << num(base) << "\" x2=\"" << num(x) << "\" y2=\""
      << num(base + 4) << "\" stroke=\"#000000\"/>";
    if (i < p.x.tick_labels.size())
      s << "<text x=\"" << num(x) << "\" y=\"" << num(base + 15) << "\" font-size=\"9\" text-anchor=\"middle\">"
        << esc(p.x.tick_labels[i]) << "</text>";
    s << "\n";
  }
  for (std::size_t i = 0; i < p.y.ticks.size(); ++i) {
    const double y = f.py(p.y.ticks[i]);
    s << "<line x1=\"" << num(f.left - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(f.left) << "\" y2=\""
      << num(y) << "\" stroke=\"#000000\"/>";
    if (i < p.y.tick_labels.size())
      s << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(y + 3) << "\" font-size=\"9\" text-anchor=\"end\">"
        << esc(p.y.tick_labels[i]) << "</text>";
    s << "\n";
  }
  if (p.x.reference)
    s << "<line x1=\"" << num(f.px(*p.x.reference)) << "\" y1=\"" << num(f.top) << "\" x2=\""
      << num(f.px(*p.x.reference)) << "\" y2=\"" << num(base) << "\" stroke=\"#999999\" stroke-dasharray=\"3,3\"/>\n";
  if (p.y.reference)
    s << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.py(*p.y.reference)) << "\" x2=\""
      << num(f.left + f.width) << "\" y2=\"" << num(f.py(*p.y.reference))
      << "\" stroke=\"#999999\" stroke-dasharray=\"3,3\"/>\n";
  for (const auto& [y, text] : p.row_labels)
    s << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(f.py(y) + 3)
      << "\" font-size=\"9\" text-anchor=\"end\">" << esc(text) << "</text>\n";
  if (!p.x.label.empty())
    s << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(base + 26)
      << "\" font-size=\"10\" text-anchor=\"middle\">" << esc(p.x.label) << "</text>\n";
  s << "</g>\n";
}

std::string polygon(const Frame& f, const std::vector<Point>& pts) {
  std::string d;
  for (std::size_t i = 0; i < pts.size(); ++i)
    d += (i ? " L" : "M") + num(f.px(pts[i].x)) + "," + num(f.py(pts[i].y));
  return d;
}

void mark(std::ostringstream& s, const Frame& f, const Mark& m) {
  s << "<g data-role=\"" << to_string(m.kind) << "\" data-source=\"" << esc(m.source) << "\"";
  if (m.size_bin) s << " data-bin=\"" << m.size_bin->index << "\"";
  if (m.secondary_bin) s << " data-bin2=\"" << m.secondary_bin->index << "\"";
  s << ">";
  const Point a = m.anchor();
  const double x = f.px(a.x), y = f.py(a.y);
  switch (m.kind) {
    case MarkKind::TRIAL_START_TICK:
      s << "<line x1=\"" << num(x) << "\" y1=\"" << num(y - m.radius) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(y + m.radius) << "\"" << style_attrs(m.style) << "/>";
      break;
    case MarkKind::TRIAL_START_SQUARE:
      s << "<rect x=\"" << num(x - m.radius) << "\" y=\"" << num(y - m.radius) << "\" width=\""
        << num(2 * m.radius) << "\" height=\"" << num(2 * m.radius) << "\"" << style_attrs(m.style) << "/>";
      break;
    case MarkKind::DURATION_LINE: {
      const Point b = m.points.back();
      s << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(f.px(b.x)) << "\" y2=\""
        << num(f.py(b.y)) << "\"" << style_attrs(m.style) << "/>";
      break;
    }
    case MarkKind::OS_CIRCLE:
    case MarkKind::PFS_CIRCLE:
    case MarkKind::EXTREME_POINT:
      s << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(m.radius) << "\""
        << style_attrs(m.style) << "/>";
      break;
    case MarkKind::FINAL_CROSS: {
      const double r = m.radius;
      s << "<path d=\"M" << num(x - r) << "," << num(y - r) << " L" << num(x + r) << "," << num(y + r) << " M"
        << num(x - r) << "," << num(y + r) << " L" << num(x + r) << "," << num(y - r) << "\""
        << style_attrs(m.style) << "/>";
      break;
    }
    case MarkKind::MATURITY_CIRCLE_PAIR:
      s << "<circle cx=\"" << num(x - m.radius * 0.5) << "\" cy=\"" << num(y) << "\" r=\"" << num(m.radius)
        << "\"" << style_attrs(m.style) << "/>";
      s << "<circle cx=\"" << num(x + m.radius2 * 0.5) << "\" cy=\"" << num(y) << "\" r=\"" << num(m.radius2)
        << "\"" << style_attrs(m.style2) << "/>";
      break;
    case MarkKind::DENSITY_CURVE: {
      if (m.points.empty()) break;
      std::vector<Point> pts = m.points;
      pts.push_back({m.points.back().x, m.baseline});
      pts.push_back({m.points.front().x, m.baseline});
      s << "<path d=\"" << polygon(f, pts) << " Z\"" << style_attrs(m.style) << "/>";
      break;
    }
    case MarkKind::VIOLIN_HALF: {
      if (m.points.empty()) break;
      std::vector<Point> pts = m.points;
      pts.push_back({m.baseline, m.points.back().y});
      pts.push_back({m.baseline, m.points.front().y});
      s << "<path d=\"" << polygon(f, pts) << " Z\"" << style_attrs(m.style) << "/>";
      break;
    }
    case MarkKind::BOXPLOT_OVERLAY: {
      if (m.points.size() < 3) break;
      const double x0 = f.px(std::min(m.points[0].x, m.points[1].x));
      const double x1 = f.px(std::max(m.points[0].x, m.points[1].x));
      const double y0 = f.py(std::max(m.points[0].y, m.points[1].y));
      const double y1 = f.py(std::min(m.points[0].y, m.points[1].y));
      s << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0) << "\" height=\""
        << num(y1 - y0) << "\"" << style_attrs(m.style) << "/>";
      const double ym = f.py(m.points[2].y);
      s << "<line x1=\"" << num(x0) << "\" y1=\"" << num(ym) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(ym)
        << "\" stroke=\"#FFFFFF\" stroke-width=\"1.50\"/>";
      break;
    }
    case MarkKind::LABEL:
      s << "<text x=\"" << num(x + 4) << "\" y=\"" << num(y + 3) << "\" font-size=\"8\" fill=\""
        << esc(m.style.stroke) << "\">" << esc(m.text) << "</text>";
      break;
  }
  s << "</g>\n";
}

void legend(std::ostringstream& s, const std::vector<LegendEntry>& entries, double left, double top) {
  s << "<g class=\"legend\">\n";
  double x = left;
  double y = top;
  for (const auto& e : entries) {
    const double r = e.radius > 0 ? e.radius : 4;
    switch (e.kind) {
      case MarkKind::DURATION_LINE:
        s << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 16) << "\" y2=\"" << num(y)
          << "\"" << style_attrs(e.style) << "/>";
        break;
      case MarkKind::FINAL_CROSS:
        s << "<path d=\"M" << num(x + 8 - r) << "," << num(y - r) << " L" << num(x + 8 + r) << ","
          << num(y + r) << " M" << num(x + 8 - r) << "," << num(y + r) << " L" << num(x + 8 + r) << ","
          << num(y - r) << "\"" << style_attrs(e.style) << "/>";
        break;
      case MarkKind::DENSITY_CURVE:
      case MarkKind::VIOLIN_HALF:
        s << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 5) << "\" width=\"16\" height=\"10\""
          << style_attrs(e.style) << "/>";
        break;
      default:
        s << "<circle cx=\"" << num(x + 8) << "\" cy=\"" << num(y) << "\" r=\"" << num(r) << "\""
          << style_attrs(e.style) << "/>";
    }
    s << "<text x=\"" << num(x + 22) << "\" y=\"" << num(y + 3) << "\" font-size=\"9\">" << esc(e.label)
      << "</text>\n";
    y += 16;
  }
  s << "</g>\n";
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const SvgOptions& o) {
  const double plot_w = o.width - o.margin_left - o.margin_right;
  double y = 44;
  std::ostringstream body;
  for (std::size_t i = 0; i < spec.panels.size(); ++i) {
    const Panel& p = spec.panels[i];
    const double h = panel_height(spec, p, o);
    body << "<g class=\"panel\" id=\"panel-" << i << "-" << esc(p.id) << "\">\n";
    body << "<text x=\"" << num(o.margin_left) << "\" y=\"" << num(y - 6)
         << "\" font-size=\"11\" font-weight=\"bold\">" << esc(p.title) << "</text>\n";
    const Frame f{o.margin_left, y, plot_w, h, p.x, p.y};
    axes(body, f, p);
    for (const auto& m : p.marks) mark(body, f, m);
    body << "</g>\n";
    y += h + o.panel_gap + 20;
  }
  legend(body, spec.legend, o.margin_left, y);
  const double height = y + 16.0 * static_cast<double>(spec.legend.size()) + 20;

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(o.width) << "\" height=\""
    << num(height) << "\" viewBox=\"0 0 " << num(o.width) << " " << num(height) << "\" data-kind=\""
    << to_string(spec.kind) << "\" font-family=\"Helvetica, Arial, sans-serif\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"#FFFFFF\"/>\n"
    << "<text x=\"" << num(o.width / 2) << "\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">"
    << esc(spec.title) << "</text>\n"
    << body.str() << "</svg>\n";
  return s.str();
}

}  // namespace evimap::viz

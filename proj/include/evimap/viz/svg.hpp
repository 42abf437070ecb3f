#ifndef EVIMAP_VIZ_SVG_HPP
#define EVIMAP_VIZ_SVG_HPP

#include <string>

#include "evimap/viz/plot_spec.hpp"

namespace evimap::viz {

struct SvgOptions {
  double width = 960;
  double margin_left = 170;
  double margin_right = 60;
  double panel_gap = 28;
  /// Pixel height of one unit on a panel's y axis, per plot kind.
  double timeline_row = 16;
  double ridge_row = 34;
  double violin_height = 240;
};

/// SVG 1.1 document; a pure function of (spec, options) with every
/// coordinate printed at two decimals. Each mark is one
/// <g data-role="KIND" data-source="..."> group.
std::string render_svg(const PlotSpec& spec, const SvgOptions& opts = {});

}  // namespace evimap::viz

#endif  // EVIMAP_VIZ_SVG_HPP

#ifndef EVIMAP_VIZ_DENSITY_HPP
#define EVIMAP_VIZ_DENSITY_HPP

#include <vector>

#include "evimap/stats.hpp"

namespace evimap::viz {

enum class DensitySource { NORMAL_APPROX, KDE_POSTERIOR };

struct DensityCurve {
  Vector xs;  // evenly spaced
  Vector ys;  // >= 0
  DensitySource source{};

  double peak() const { return ys.size() ? ys.maxCoeff() : 0.0; }
  double argmax() const;
  /// Trapezoid integral of ys over xs.
  double integral() const;
  bool operator==(const DensityCurve& o) const {
    return source == o.source && xs.size() == o.xs.size() && xs == o.xs && ys == o.ys;
  }
};

inline constexpr int kDefaultGrid = 512;
inline constexpr int kMinKdeDraws = 30;
inline constexpr double kBandwidthFloor = 1e-6;

/// Silverman's rule of thumb, 0.9 * min(sd, IQR / 1.34) * n^(-1/5), floored.
double silverman_bandwidth(const Vector& draws);

/// Gaussian KDE on [min - 3h, max + 3h]. Throws TooFewDraws below 30 draws.
DensityCurve kde(const Vector& draws, int grid = kDefaultGrid);

/// N(mean, sd^2) density on mean +/- 4 sd.
DensityCurve normal_density(double mean, double sd, int grid = kDefaultGrid);

/// Indices of strict interior local maxima of ys.
std::vector<Eigen::Index> local_maxima(const DensityCurve& c);

}  // namespace evimap::viz

#endif  // EVIMAP_VIZ_DENSITY_HPP

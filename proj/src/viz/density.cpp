#include "evimap/viz/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace evimap::viz {

double DensityCurve::argmax() const {
  Eigen::Index i = 0;
  if (ys.size() == 0) return 0.0;
  ys.maxCoeff(&i);
  return xs(i);
}

double DensityCurve::integral() const {
  double s = 0.0;
  for (Eigen::Index i = 1; i < xs.size(); ++i) s += 0.5 * (ys(i) + ys(i - 1)) * (xs(i) - xs(i - 1));
  return s;
}

double silverman_bandwidth(const Vector& draws) {
  const auto n = static_cast<double>(draws.size());
  const Vector s = sorted_copy(draws);
  const double sd = sample_sd(draws);
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  double spread = sd;
  if (iqr > 0) spread = std::min(sd, iqr / 1.34);
  return std::max(0.9 * spread * std::pow(n, -0.2), kBandwidthFloor);
}

DensityCurve kde(const Vector& draws, int grid) {
  if (draws.size() < kMinKdeDraws)
    throw Error(ErrorCode::TooFewDraws, "kde needs at least 30 draws");
  if (grid < 2) throw Error(ErrorCode::InvalidArgument, "kde grid needs at least 2 points");
  const double h = silverman_bandwidth(draws);
  const Vector s = sorted_copy(draws);
  const double lo = s(0) - 3 * h, hi = s(s.size() - 1) + 3 * h;
  DensityCurve c;
  c.source = DensitySource::KDE_POSTERIOR;
  c.xs = Vector::LinSpaced(grid, lo, hi);
  c.ys = Vector::Zero(grid);
  const double norm = 1.0 / (static_cast<double>(s.size()) * h * std::sqrt(2 * std::numbers::pi));
  const double* begin = s.data();
  const double* end = s.data() + s.size();
  // Kernel mass beyond 8 bandwidths is below 1e-14 and is skipped.
  for (int g = 0; g < grid; ++g) {
    const double x = c.xs(g);
    const double* a = std::lower_bound(begin, end, x - 8 * h);
    const double* b = std::upper_bound(a, end, x + 8 * h);
    double acc = 0.0;
    for (const double* p = a; p != b; ++p) {
      const double z = (x - *p) / h;
      acc += std::exp(-0.5 * z * z);
    }
    c.ys(g) = acc * norm;
  }
  return c;
}

DensityCurve normal_density(double mean, double sd, int grid) {
  if (!(sd > 0)) throw Error(ErrorCode::InvalidArgument, "normal_density: sd must be positive");
  DensityCurve c;
  c.source = DensitySource::NORMAL_APPROX;
  c.xs = Vector::LinSpaced(grid, mean - 4 * sd, mean + 4 * sd);
  c.ys = ((c.xs.array() - mean) / sd).square().unaryExpr([](double v) { return std::exp(-0.5 * v); }) /
         (sd * std::sqrt(2 * std::numbers::pi));
  return c;
}

std::vector<Eigen::Index> local_maxima(const DensityCurve& c) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 1; i + 1 < c.ys.size(); ++i)
    if (c.ys(i) > c.ys(i - 1) && c.ys(i) >= c.ys(i + 1)) out.push_back(i);
  return out;
}

}  // namespace evimap::viz

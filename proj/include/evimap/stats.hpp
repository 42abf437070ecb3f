#ifndef EVIMAP_STATS_HPP
#define EVIMAP_STATS_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "evimap/core.hpp"

namespace evimap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Type-7 quantile (linear interpolation between order statistics) of an
/// already sorted sample.
template <typename Derived>
typename Derived::Scalar quantile_sorted(const Eigen::DenseBase<Derived>& sorted, double p) {
  const Eigen::Index n = sorted.size();
  if (n == 0) throw Error(ErrorCode::TooFewDraws, "quantile of empty sample");
  const double h = (n - 1) * p;
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min<Eigen::Index>(lo + 1, n - 1);
  return sorted(lo) + (h - lo) * (sorted(hi) - sorted(lo));
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sorted_copy(
    const Eigen::DenseBase<Derived>& x) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> s = x.derived();
  std::sort(s.data(), s.data() + s.size());
  return s;
}

template <typename Derived>
typename Derived::Scalar quantile(const Eigen::DenseBase<Derived>& x, double p) {
  return quantile_sorted(sorted_copy(x), p);
}

/// Median and equal-tailed 95% interval of a set of posterior draws.
struct PosteriorSummary {
  double median = 0;
  double lower95 = 0;
  double upper95 = 0;
  Vector draws;

  double mean() const { return draws.size() ? draws.mean() : median; }
  double sd() const;
  bool has_draws() const { return draws.size() > 0; }
};

PosteriorSummary summarize(const Vector& draws);

/// Sample standard deviation (n - 1 denominator).
template <typename Derived>
double sample_sd(const Eigen::DenseBase<Derived>& x) {
  const auto n = x.size();
  if (n < 2) return 0.0;
  const double m = x.derived().mean();
  return std::sqrt((x.derived().array() - m).square().sum() / static_cast<double>(n - 1));
}

/// -2 log-likelihood of y ~ N(delta, sigma^2), normalising constants included:
/// sum (y - delta)^2 / sigma^2 + ln(2 pi sigma^2).
template <typename DY, typename DS, typename DD>
typename DY::Scalar deviance(const Eigen::MatrixBase<DY>& y, const Eigen::MatrixBase<DS>& sigma,
                             const Eigen::MatrixBase<DD>& delta) {
  using Scalar = typename DY::Scalar;
  if (y.size() != sigma.size() || y.size() != delta.size())
    throw Error(ErrorCode::LengthMismatch, "deviance: data and deltas differ in length");
  const auto var = sigma.array().square();
  return ((y - delta).array().square() / var + (Scalar(2 * std::numbers::pi) * var).log()).sum();
}

/// dic == dbar + pd holds exactly by construction.
struct FitStats {
  double dbar = 0;
  double pd = 0;
  double dic = 0;
};

/// Plug-in DIC from a draws x studies matrix of study-level effects.
template <typename DY, typename DS, typename DM>
FitStats fit_stats(const Eigen::MatrixBase<DY>& y, const Eigen::MatrixBase<DS>& sigma,
                   const Eigen::MatrixBase<DM>& delta_draws) {
  if (delta_draws.rows() == 0) throw Error(ErrorCode::TooFewDraws, "fit_stats: no draws");
  if (delta_draws.cols() != y.size())
    throw Error(ErrorCode::LengthMismatch, "fit_stats: draws and data differ in width");
  double sum = 0.0;
  for (Eigen::Index s = 0; s < delta_draws.rows(); ++s)
    sum += deviance(y, sigma, delta_draws.row(s).transpose());
  FitStats f;
  f.dbar = sum / static_cast<double>(delta_draws.rows());
  const Vector mean_delta = delta_draws.colwise().mean().transpose();
  f.pd = f.dbar - deviance(y, sigma, mean_delta);
  f.dic = f.dbar + f.pd;
  return f;
}

/// Split-chain potential scale reduction factor. Each chain is halved and the
/// classic between/within variance ratio is taken over the 2m half-chains.
double gelman_rubin(const std::vector<Vector>& chains);

/// Monte Carlo standard error of the mean by non-overlapping batch means
/// (sqrt(n) batches).
double mcse_mean(const Vector& draws);

}  // namespace evimap

#endif  // EVIMAP_STATS_HPP

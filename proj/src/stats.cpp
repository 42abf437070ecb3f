#include "evimap/stats.hpp"

namespace evimap {

double PosteriorSummary::sd() const { return sample_sd(draws); }

PosteriorSummary summarize(const Vector& draws) {
  if (draws.size() == 0) throw Error(ErrorCode::TooFewDraws, "summarize: no draws");
  const Vector s = sorted_copy(draws);
  PosteriorSummary out;
  out.median = quantile_sorted(s, 0.5);
  out.lower95 = quantile_sorted(s, 0.025);
  out.upper95 = quantile_sorted(s, 0.975);
  out.draws = draws;
  return out;
}

double gelman_rubin(const std::vector<Vector>& chains) {
  if (chains.size() < 2) throw Error(ErrorCode::TooFewChains, "need at least two chains");
  const Eigen::Index len = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != len) throw Error(ErrorCode::LengthMismatch, "chains differ in length");
  const Eigen::Index n = len / 2;
  if (n < 2) throw Error(ErrorCode::TooFewDraws, "chains too short to split");

  std::vector<Eigen::Ref<const Vector>> halves;
  for (const auto& c : chains) {
    halves.emplace_back(c.head(n));
    halves.emplace_back(c.segment(len - n, n));
  }
  const auto m = static_cast<double>(halves.size());
  Vector means(halves.size()), vars(halves.size());
  for (std::size_t j = 0; j < halves.size(); ++j) {
    means(j) = halves[j].mean();
    vars(j) = (halves[j].array() - means(j)).square().sum() / static_cast<double>(n - 1);
  }
  const double grand = means.mean();
  const double between = static_cast<double>(n) * (means.array() - grand).square().sum() / (m - 1);
  const double within = vars.mean();
  if (within <= 0.0) return between <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (static_cast<double>(n) - 1) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

double mcse_mean(const Vector& draws) {
  const auto n = draws.size();
  const auto batches = static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(n))));
  if (batches < 2) throw Error(ErrorCode::TooFewDraws, "mcse: too few draws");
  const Eigen::Index size = n / batches;
  Vector means(batches);
  for (Eigen::Index b = 0; b < batches; ++b) means(b) = draws.segment(b * size, size).mean();
  return sample_sd(means) / std::sqrt(static_cast<double>(batches));
}

}  // namespace evimap

#ifndef EVIMAP_SYNTHESIS_HPP
#define EVIMAP_SYNTHESIS_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evimap/core.hpp"
#include "evimap/stats.hpp"

namespace evimap {

/// Cross-indication sharing assumption.
///  IP  - independent d_j per indication, vague N(0, V) prior each.
///  CP  - one common d shared by every indication.
///  HMA - d_j ~ N(m_d, tau_d^2), m_d ~ N(0, V), tau_d ~ half-normal.
enum class ModelKind { IP, CP, HMA };

inline constexpr std::array<ModelKind, 3> kAllModels{ModelKind::IP, ModelKind::CP, ModelKind::HMA};

std::string_view to_string(ModelKind m);
std::optional<ModelKind> parse_model(std::string_view s);

struct ModelSpec {
  ModelKind model = ModelKind::IP;
  /// Variance (not precision) of the vague normal priors on d_j, d and m_d.
  double prior_effect_variance = 1000.0;
  /// Half-normal scale of each within-indication SD tau_j.
  double prior_tau_scale = 0.5;
  /// Half-normal scale of the between-indication SD tau_d (HMA only).
  double prior_taud_scale = 0.5;
  /// Test hook: pins every tau_j to this value instead of sampling it.
  std::optional<double> fixed_tau;

  void validate() const;
};

struct McmcConfig {
  int chains = 3;
  int burn_in = 10000;
  int samples_per_chain = 20000;
  int thin = 1;
  std::uint64_t seed = 0;
  /// Keep raw draws of the study-level effects delta_ij in the result.
  bool keep_study_draws = true;
  /// Run chains on separate threads. Output does not depend on this.
  bool parallel_chains = true;

  int retained_per_chain() const { return samples_per_chain / thin; }
  int total_retained() const { return chains * retained_per_chain(); }
  void validate() const;
};

struct Datapoint {
  double y = 0;      // ln HR
  double sigma = 1;  // standard error of y
  Indication indication{};
  std::string label;
};

/// Split-R-hat threshold above which a result is flagged as not converged.
inline constexpr double kRhatThreshold = 1.05;

struct SynthesisResult {
  ModelKind model{};
  std::size_t n_datapoints = 0;
  /// d_j per indication present in the data; under CP every entry holds the
  /// shared d.
  std::map<Indication, PosteriorSummary> pooled_effect;
  /// tau_j per indication present in the data.
  std::map<Indication, PosteriorSummary> within_sd;
  /// tau_d and m_d; present iff model == HMA.
  std::optional<PosteriorSummary> between_sd;
  std::optional<PosteriorSummary> overall_mean;
  /// delta_ij keyed by datapoint label.
  std::map<std::string, PosteriorSummary> study_effects;
  FitStats fit;
  /// Split-R-hat of every monitored parameter (d_j or d, tau_j, m_d, tau_d).
  std::map<std::string, double> rhat;
  bool converged = true;

  double max_rhat() const;
};

/// Gibbs sampler over the normal-normal hierarchy with slice-sampled SDs.
/// Deterministic in (data, spec, cfg); chain c draws from an RNG stream
/// derived from (cfg.seed, c). Throws EmptyIndication on empty data and
/// InvalidArgument on duplicate labels or non-positive sigma. A result whose
/// split-R-hat exceeds kRhatThreshold is returned with converged == false.
SynthesisResult run_synthesis(std::span<const Datapoint> data, const ModelSpec& spec,
                              const McmcConfig& cfg);

/// Vector form of the deviance over datapoints.
double deviance(std::span<const Datapoint> data, const Vector& deltas);
FitStats fit_stats(std::span<const Datapoint> data, const Matrix& delta_draws);

/// Closed-form posterior of d_j for one indication when tau is known:
/// y_i ~ N(d, sigma_i^2 + tau^2), d ~ N(0, prior_variance).
struct NormalPosterior {
  double mean;
  double sd;
};
NormalPosterior conjugate_pooled_posterior(std::span<const Datapoint> data, double tau,
                                           double prior_variance);

}  // namespace evimap

#endif  // EVIMAP_SYNTHESIS_HPP

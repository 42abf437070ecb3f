#include "evimap/synthesis.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <set>

namespace evimap {

std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::IP: return "IP";
    case ModelKind::CP: return "CP";
    case ModelKind::HMA: return "HMA";
  }
  return "?";
}

std::optional<ModelKind> parse_model(std::string_view s) {
  for (auto m : kAllModels) {
    const auto name = to_string(m);
    if (s.size() == name.size() &&
        std::equal(s.begin(), s.end(), name.begin(),
                   [](char a, char b) { return std::toupper(static_cast<unsigned char>(a)) == b; }))
      return m;
  }
  return std::nullopt;
}

void ModelSpec::validate() const {
  if (!(prior_effect_variance > 0))
    throw Error(ErrorCode::InvalidArgument, "prior_effect_variance must be positive");
  if (!(prior_tau_scale > 0)) throw Error(ErrorCode::InvalidArgument, "prior_tau_scale must be positive");
  if (!(prior_taud_scale > 0))
    throw Error(ErrorCode::InvalidArgument, "prior_taud_scale must be positive");
  if (fixed_tau && !(*fixed_tau > 0))
    throw Error(ErrorCode::InvalidArgument, "fixed_tau must be positive");
}

void McmcConfig::validate() const {
  if (chains < 1) throw Error(ErrorCode::InvalidArgument, "chains must be >= 1");
  if (burn_in < 0) throw Error(ErrorCode::InvalidArgument, "burn_in must be >= 0");
  if (thin < 1) throw Error(ErrorCode::InvalidArgument, "thin must be >= 1");
  if (samples_per_chain < thin)
    throw Error(ErrorCode::InvalidArgument, "samples_per_chain must be >= thin");
}

double SynthesisResult::max_rhat() const {
  double m = 1.0;
  for (const auto& [name, r] : rhat) m = std::max(m, r);
  return m;
}

double deviance(std::span<const Datapoint> data, const Vector& deltas) {
  Vector y(data.size()), s(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    y(i) = data[i].y;
    s(i) = data[i].sigma;
  }
  return deviance(y, s, deltas);
}

FitStats fit_stats(std::span<const Datapoint> data, const Matrix& delta_draws) {
  Vector y(data.size()), s(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    y(i) = data[i].y;
    s(i) = data[i].sigma;
  }
  return fit_stats(y, s, delta_draws);
}

NormalPosterior conjugate_pooled_posterior(std::span<const Datapoint> data, double tau,
                                           double prior_variance) {
  double prec = 1.0 / prior_variance, num = 0.0;
  for (const auto& p : data) {
    const double w = 1.0 / (p.sigma * p.sigma + tau * tau);
    prec += w;
    num += w * p.y;
  }
  return {num / prec, std::sqrt(1.0 / prec)};
}

namespace {

using Rng = std::mt19937_64;

Rng chain_rng(std::uint64_t seed, int chain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain), 0x5eedu};
  return Rng(seq);
}

/// Stepping-out slice sampler on u = ln(t) for the conditional density of a
/// scale t > 0 given a half-normal(scale) prior and `count` normal residuals
/// with sum of squares `ss`.
class ScaleSlice {
 public:
  ScaleSlice(double scale, double count, double ss) : s2_(scale * scale), n_(count), ss_(ss) {}

  double operator()(double t, Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    const double u0 = std::log(t);
    const double level = logf(u0) - expo(rng);
    constexpr double w = 1.0;
    constexpr int max_steps = 50;
    double lo = u0 - w * unif(rng);
    double hi = lo + w;
    for (int k = 0; k < max_steps && logf(lo) > level; ++k) lo -= w;
    for (int k = 0; k < max_steps && logf(hi) > level; ++k) hi += w;
    for (;;) {
      const double u = lo + (hi - lo) * unif(rng);
      if (logf(u) > level) return std::exp(u);
      if (u < u0) lo = u;
      else hi = u;
    }
  }

 private:
  // log density of u = ln t, Jacobian included.
  double logf(double u) const {
    const double t2 = std::exp(2.0 * u);
    return -t2 / (2.0 * s2_) - (n_ - 1.0) * u - ss_ / (2.0 * t2);
  }

  double s2_;
  double n_;
  double ss_;
};

struct Problem {
  std::vector<Indication> groups;  // indications present, enum order
  std::vector<int> group_of;       // datapoint -> group index
  Vector y, var;
  ModelSpec spec;
};

struct ChainDraws {
  Matrix d;       // retained x J  (CP: retained x 1)
  Matrix tau;     // retained x J
  Vector md, td;  // HMA only
  Matrix delta;   // retained x n
};

ChainDraws run_chain(const Problem& p, const McmcConfig& cfg, int chain) {
  Rng rng = chain_rng(cfg.seed, chain);
  std::normal_distribution<double> norm(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(p.group_of.size());
  const auto J = static_cast<Eigen::Index>(p.groups.size());
  const ModelKind model = p.spec.model;
  const double V0 = p.spec.prior_effect_variance;
  const bool hma = model == ModelKind::HMA;
  const Eigen::Index nd = model == ModelKind::CP ? 1 : J;
  auto dix = [&](Eigen::Index g) { return model == ModelKind::CP ? Eigen::Index{0} : g; };

  // Initial state: delta at the data, d at precision-weighted means, SDs 0.1.
  Vector delta = p.y;
  Vector d = Vector::Zero(nd);
  {
    Vector wsum = Vector::Zero(nd), wy = Vector::Zero(nd);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = dix(p.group_of[i]);
      wsum(k) += 1.0 / p.var(i);
      wy(k) += p.y(i) / p.var(i);
    }
    d = wy.cwiseQuotient(wsum);
  }
  Vector tau = Vector::Constant(J, p.spec.fixed_tau.value_or(0.1));
  double md = hma ? (p.y.cwiseQuotient(p.var).sum() / p.var.cwiseInverse().sum()) : 0.0;
  double td = 0.1;

  const int kept = cfg.retained_per_chain();
  ChainDraws out;
  out.d.resize(kept, nd);
  out.tau.resize(kept, J);
  if (hma) {
    out.md.resize(kept);
    out.td.resize(kept);
  }
  out.delta.resize(kept, n);

  Vector count = Vector::Zero(J);
  for (Eigen::Index i = 0; i < n; ++i) count(p.group_of[i]) += 1.0;

  const int total = cfg.burn_in + cfg.samples_per_chain;
  for (int it = 0; it < total; ++it) {
    // delta_i | y_i, d, tau
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto g = p.group_of[i];
      const double t2 = tau(g) * tau(g);
      const double prec = 1.0 / p.var(i) + 1.0 / t2;
      const double mean = (p.y(i) / p.var(i) + d(dix(g)) / t2) / prec;
      delta(i) = mean + norm(rng) / std::sqrt(prec);
    }

    // d | delta, tau (and m_d, tau_d under HMA)
    {
      Vector prec = Vector::Constant(nd, hma ? 1.0 / (td * td) : 1.0 / V0);
      Vector num = Vector::Constant(nd, hma ? md / (td * td) : 0.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto g = p.group_of[i];
        const double w = 1.0 / (tau(g) * tau(g));
        prec(dix(g)) += w;
        num(dix(g)) += w * delta(i);
      }
      for (Eigen::Index k = 0; k < nd; ++k) d(k) = num(k) / prec(k) + norm(rng) / std::sqrt(prec(k));
    }

    // tau_j | delta, d
    if (!p.spec.fixed_tau) {
      Vector ss = Vector::Zero(J);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto g = p.group_of[i];
        const double r = delta(i) - d(dix(g));
        ss(g) += r * r;
      }
      for (Eigen::Index g = 0; g < J; ++g)
        tau(g) = ScaleSlice(p.spec.prior_tau_scale, count(g), ss(g))(tau(g), rng);
    }

    if (hma) {
      const double prec = 1.0 / V0 + static_cast<double>(J) / (td * td);
      md = d.sum() / (td * td) / prec + norm(rng) / std::sqrt(prec);
      const double ss = (d.array() - md).square().sum();
      td = ScaleSlice(p.spec.prior_taud_scale, static_cast<double>(J), ss)(td, rng);
    }

    const int s = it - cfg.burn_in;
    if (s >= 0 && (s + 1) % cfg.thin == 0) {
      const int row = s / cfg.thin;
      if (row >= kept) continue;
      out.d.row(row) = d.transpose();
      out.tau.row(row) = tau.transpose();
      if (hma) {
        out.md(row) = md;
        out.td(row) = td;
      }
      out.delta.row(row) = delta.transpose();
    }
  }
  return out;
}

Vector stack(const std::vector<Vector>& parts) {
  Eigen::Index total = 0;
  for (const auto& v : parts) total += v.size();
  Vector out(total);
  Eigen::Index at = 0;
  for (const auto& v : parts) {
    out.segment(at, v.size()) = v;
    at += v.size();
  }
  return out;
}

}  // namespace

SynthesisResult run_synthesis(std::span<const Datapoint> data, const ModelSpec& spec,
                              const McmcConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (data.empty()) throw Error(ErrorCode::EmptyIndication, "no datapoints to synthesise");

  Problem p;
  p.spec = spec;
  std::set<Indication> present;
  std::set<std::string> labels;
  for (const auto& dp : data) {
    if (!(dp.sigma > 0) || !std::isfinite(dp.sigma) || !std::isfinite(dp.y))
      throw Error(ErrorCode::InvalidArgument, "datapoint '" + dp.label + "' has invalid y or sigma");
    if (!labels.insert(dp.label).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate datapoint label '" + dp.label + "'");
    present.insert(dp.indication);
  }
  p.groups.assign(present.begin(), present.end());
  const auto n = static_cast<Eigen::Index>(data.size());
  p.y.resize(n);
  p.var.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.y(i) = data[i].y;
    p.var(i) = data[i].sigma * data[i].sigma;
    p.group_of.push_back(static_cast<int>(
        std::find(p.groups.begin(), p.groups.end(), data[i].indication) - p.groups.begin()));
  }

  std::vector<ChainDraws> chains(cfg.chains);
  if (cfg.parallel_chains && cfg.chains > 1) {
    std::vector<std::future<ChainDraws>> jobs;
    for (int c = 0; c < cfg.chains; ++c)
      jobs.push_back(std::async(std::launch::async, run_chain, std::cref(p), std::cref(cfg), c));
    for (int c = 0; c < cfg.chains; ++c) chains[c] = jobs[c].get();
  } else {
    for (int c = 0; c < cfg.chains; ++c) chains[c] = run_chain(p, cfg, c);
  }

  SynthesisResult r;
  r.model = spec.model;
  r.n_datapoints = data.size();

  auto pooled = [&](auto getter, const std::string& name) {
    std::vector<Vector> per_chain;
    for (const auto& ch : chains) per_chain.push_back(getter(ch));
    if (cfg.chains >= 2 && per_chain.front().size() >= 4) {
      r.rhat[name] = gelman_rubin(per_chain);
    }
    return summarize(stack(per_chain));
  };

  const auto J = static_cast<Eigen::Index>(p.groups.size());
  if (spec.model == ModelKind::CP) {
    const auto s = pooled([](const ChainDraws& ch) { return Vector(ch.d.col(0)); }, "d");
    for (auto g : p.groups) r.pooled_effect[g] = s;
  } else {
    for (Eigen::Index g = 0; g < J; ++g)
      r.pooled_effect[p.groups[g]] =
          pooled([g](const ChainDraws& ch) { return Vector(ch.d.col(g)); },
                 "d[" + std::string(to_string(p.groups[g])) + "]");
  }
  for (Eigen::Index g = 0; g < J; ++g) {
    auto get = [g](const ChainDraws& ch) { return Vector(ch.tau.col(g)); };
    const std::string name = "tau[" + std::string(to_string(p.groups[g])) + "]";
    if (spec.fixed_tau) {
      std::vector<Vector> parts;
      for (const auto& ch : chains) parts.push_back(get(ch));
      r.within_sd[p.groups[g]] = summarize(stack(parts));
    } else {
      r.within_sd[p.groups[g]] = pooled(get, name);
    }
  }
  if (spec.model == ModelKind::HMA) {
    r.overall_mean = pooled([](const ChainDraws& ch) { return ch.md; }, "m_d");
    r.between_sd = pooled([](const ChainDraws& ch) { return ch.td; }, "tau_d");
  }

  Matrix all_delta(cfg.total_retained(), n);
  {
    Eigen::Index at = 0;
    for (auto& ch : chains) {
      all_delta.middleRows(at, ch.delta.rows()) = ch.delta;
      at += ch.delta.rows();
      ch.delta.resize(0, 0);
    }
  }
  r.fit = fit_stats(p.y, p.var.cwiseSqrt(), all_delta);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto s = summarize(Vector(all_delta.col(i)));
    if (!cfg.keep_study_draws) s.draws.resize(0);
    r.study_effects[data[i].label] = std::move(s);
  }
  r.converged = r.max_rhat() <= kRhatThreshold;
  return r;
}

}  // namespace evimap

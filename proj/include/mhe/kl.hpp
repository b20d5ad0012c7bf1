#ifndef MHE_KL_HPP
#define MHE_KL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mhe/cost.hpp"
#include "mhe/ensemble.hpp"
#include "mhe/errors.hpp"
#include "mhe/model.hpp"
#include "mhe/parallel.hpp"
#include "mhe/rng.hpp"
#include "mhe/w2.hpp"

namespace mhe {

// Particle cloud with normalized importance weights.
struct WeightedEnsemble {
  std::vector<Vec> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }

  void validate_normalized() const {
    if (points.empty()) throw ConfigError("particle cloud must be nonempty");
    if (weights.size() != points.size())
      throw ConfigError("particle cloud weight count mismatch");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw ConfigError("particle weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ConfigError("particle weights must be normalized to 1");
  }

  Vec mean() const {
    validate_normalized();
    Vec acc = Vec::Zero(points.front().size());
    for (std::size_t i = 0; i < points.size(); ++i) acc += weights[i] * points[i];
    return acc;
  }

  double ess() const {
    double sq = 0.0;
    for (double w : weights) sq += w * w;
    return sq > 0.0 ? 1.0 / sq : 0.0;
  }

  Ensemble to_ensemble() const {
    Ensemble e;
    e.points = points;
    return e;
  }

  static WeightedEnsemble uniform(const Ensemble& e) {
    e.require_nonempty();
    WeightedEnsemble we;
    we.points = e.points;
    we.weights.assign(e.points.size(), 1.0 / static_cast<double>(e.points.size()));
    return we;
  }
};

struct ParticleFilterConfig {
  double eta = 0.0;
  int n_window = 1;
  int n_particles = 1;
  double resample_threshold = 0.5;  // resample when ESS < threshold * n
  double jitter_bandwidth = 0.0;    // 0 selects a per-coordinate Silverman bandwidth
  std::optional<DpSchedule> dp;
  // Optional disturbed propagation: particles move through f(x, w) with w
  // drawn from this spec instead of the noise-free f0. Absent (or a zero
  // bound) reproduces the pure noise-free recursion.
  std::optional<NoiseSpec> propagation_noise;
  int threads = 1;

  void validate() const {
    if (eta <= 0.0) throw ConfigError("particle filter eta must be positive");
    if (n_window < 1) throw ConfigError("particle filter window must be at least 1");
    if (n_particles < 1) throw ConfigError("particle filter needs at least one particle");
    if (!(resample_threshold > 0.0 && resample_threshold <= 1.0))
      throw ConfigError("resample threshold must lie in (0, 1]");
    if (jitter_bandwidth < 0.0) throw ConfigError("jitter bandwidth must be nonnegative");
    if (dp) {
      for (double s : dp->s)
        if (!(s > 0.0 && s <= 1.0))
          throw ConfigError("privacy schedule levels must lie in (0, 1]");
    }
  }
};

// Stratified ancestor selection: one uniform offset u0, positions (i+u0)/n
// against the cumulative weights. Expected count of index i is n*w_i with
// deviation below 1.
inline std::vector<int> systematic_resample(const std::vector<double>& weights, int n,
                                            std::uint64_t seed) {
  if (weights.empty()) throw ConfigError("resampling requires nonempty weights");
  if (n < 1) throw ConfigError("resampling requires n >= 1");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("resampling weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("resampling weights must be normalized to 1");

  Rng rng(derive_seed(seed, 0x52));
  const double u0 = rng.uniform01();
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(n));
  double cumulative = weights[0];
  int j = 0;
  const int last = static_cast<int>(weights.size()) - 1;
  for (int i = 0; i < n; ++i) {
    const double pos = (static_cast<double>(i) + u0) / static_cast<double>(n);
    while (cumulative < pos && j < last) {
      ++j;
      cumulative += weights[static_cast<std::size_t>(j)];
    }
    idx.push_back(j);
  }
  return idx;
}

struct KlStepResult {
  WeightedEnsemble ensemble;
  double ess = 0.0;
  bool resampled = false;
  double min_cost = 0.0;  // smallest window cost over particles this step
};

namespace detail {

// Per-coordinate Silverman bandwidth of a weighted cloud:
//   h_j = sigma_j * (4 / ((d+2) n))^(1/(d+4)).
inline Vec silverman_bandwidth(const std::vector<Vec>& points, const std::vector<double>& weights) {
  const int d = static_cast<int>(points.front().size());
  const double n = static_cast<double>(points.size());
  Vec mean = Vec::Zero(d);
  for (std::size_t i = 0; i < points.size(); ++i) mean += weights[i] * points[i];
  Vec var = Vec::Zero(d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec diff = points[i] - mean;
    var += weights[i] * diff.cwiseProduct(diff);
  }
  const double factor = std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
  return var.cwiseSqrt() * factor;
}

}  // namespace detail

// One particle-filter update against the window cost anchored at
// cost.base_index: propagate, (optionally) temper with kernel jitter, weight
// by exp(-eta * s * G), renormalize, and resample when the effective sample
// size drops below the configured fraction.
inline KlStepResult kl_step(const WeightedEnsemble& cloud, const HorizonCost& cost,
                            const ParticleFilterConfig& config, std::uint64_t seed) {
  cloud.validate_normalized();
  cost.validate();
  config.validate();
  const SystemModel& model = *cost.model;
  const int n = cloud.size();
  const int k = cost.base_index;

  double s_level = 1.0;
  if (config.dp) s_level = detail::dp_level_for_step(*config.dp, k);

  // Propagate through the dynamics (noise-free unless disturbed propagation
  // is configured), with per-particle derived seeds.
  std::vector<Vec> propagated(static_cast<std::size_t>(n));
  const bool disturbed = config.propagation_noise.has_value() &&
                         (config.propagation_noise->process_bound > 0.0 ||
                          static_cast<bool>(config.propagation_noise->process_sampler));
  parallel_for(n, config.threads, [&](int i) {
    const Vec& x = cloud.points[static_cast<std::size_t>(i)];
    if (disturbed) {
      Rng rng(derive_seed(seed, 0x50, static_cast<std::uint64_t>(i)));
      const Vec w = detail::draw_noise(rng, config.propagation_noise->process_sampler,
                                       model.dim_noise, config.propagation_noise->process_bound);
      propagated[static_cast<std::size_t>(i)] = model.step(x, w);
    } else {
      propagated[static_cast<std::size_t>(i)] = model.f0(x);
    }
  });

  // Tempering jitter approximates raising the kernel-density estimate of the
  // propagated cloud to the power s: bandwidth inflation by sqrt(1/s - 1).
  // s = 1 adds nothing and draws nothing.
  if (s_level < 1.0) {
    Vec bandwidth;
    if (config.jitter_bandwidth > 0.0)
      bandwidth = Vec::Constant(model.dim_state, config.jitter_bandwidth);
    else
      bandwidth = detail::silverman_bandwidth(propagated, cloud.weights);
    const double inflate = std::sqrt(1.0 / s_level - 1.0);
    parallel_for(n, config.threads, [&](int i) {
      Rng rng(derive_seed(seed, 0x51, static_cast<std::uint64_t>(i)));
      Vec& x = propagated[static_cast<std::size_t>(i)];
      for (int c = 0; c < x.size(); ++c) x(c) += bandwidth(c) * inflate * rng.normal();
    });
  }

  // Weight update in log space.
  std::vector<double> costs(static_cast<std::size_t>(n));
  parallel_for(n, config.threads, [&](int i) {
    costs[static_cast<std::size_t>(i)] = g_value(cost, propagated[static_cast<std::size_t>(i)]);
  });
  std::vector<double> log_w(static_cast<std::size_t>(n));
  double max_log = -std::numeric_limits<double>::infinity();
  double min_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double prev = cloud.weights[static_cast<std::size_t>(i)];
    const double lw = (prev > 0.0 ? std::log(prev) : -std::numeric_limits<double>::infinity()) -
                      config.eta * s_level * costs[static_cast<std::size_t>(i)];
    log_w[static_cast<std::size_t>(i)] = lw;
    max_log = std::max(max_log, lw);
    min_cost = std::min(min_cost, costs[static_cast<std::size_t>(i)]);
  }
  if (max_log < -700.0)
    throw DegeneracyError("all particle weights underflowed (best window cost " +
                              std::to_string(min_cost) + ")",
                          min_cost);

  KlStepResult result;
  result.min_cost = min_cost;
  result.ensemble.points = std::move(propagated);
  result.ensemble.weights.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = std::exp(log_w[static_cast<std::size_t>(i)] - max_log);
    result.ensemble.weights[static_cast<std::size_t>(i)] = w;
    total += w;
  }
  for (double& w : result.ensemble.weights) w /= total;

  result.ess = result.ensemble.ess();
  if (result.ess < config.resample_threshold * static_cast<double>(n)) {
    const std::vector<int> idx =
        systematic_resample(result.ensemble.weights, n, derive_seed(seed, 0x52));
    std::vector<Vec> resampled_points;
    resampled_points.reserve(static_cast<std::size_t>(n));
    for (int a : idx) resampled_points.push_back(result.ensemble.points[static_cast<std::size_t>(a)]);
    result.ensemble.points = std::move(resampled_points);
    result.ensemble.weights.assign(static_cast<std::size_t>(n),
                                   1.0 / static_cast<double>(n));
    result.resampled = true;
  }
  return result;
}

struct KlStepRecord {
  int k = 0;
  Vec mean;
  double ess = 0.0;
  bool resampled = false;
};

struct KlRunResult {
  std::vector<WeightedEnsemble> clouds;  // index k = 0..T
  std::vector<KlStepRecord> steps;       // steps 1..T

  std::vector<Vec> means() const {
    std::vector<Vec> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.mean);
    return out;
  }
};

// Full filtering pass; windows cover ys[k+1..k+N] exactly as in run_w2.
inline KlRunResult run_kl(const SystemModel& model, const std::vector<Vec>& ys,
                          const WeightedEnsemble& prior, const ParticleFilterConfig& config,
                          int horizon_T, std::uint64_t seed) {
  model.validate();
  prior.validate_normalized();
  config.validate();
  if (horizon_T < 1) throw ConfigError("estimator horizon must be at least 1");
  if (static_cast<int>(ys.size()) < horizon_T + config.n_window + 1)
    throw ConfigError("measurement record too short: need T + N + 1 values");

  KlRunResult result;
  result.clouds.reserve(static_cast<std::size_t>(horizon_T) + 1);
  result.clouds.push_back(prior);
  for (int k = 1; k <= horizon_T; ++k) {
    const HorizonCost cost = make_window_cost(model, ys, k, config.n_window);
    KlStepResult step =
        kl_step(result.clouds.back(), cost, config, derive_seed(seed, 0x40, static_cast<std::uint64_t>(k)));
    KlStepRecord rec;
    rec.k = k;
    rec.mean = step.ensemble.mean();
    rec.ess = step.ess;
    rec.resampled = step.resampled;
    result.steps.push_back(std::move(rec));
    result.clouds.push_back(std::move(step.ensemble));
  }
  return result;
}

}  // namespace mhe

#endif  // MHE_KL_HPP

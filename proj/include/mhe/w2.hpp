#ifndef MHE_W2_HPP
#define MHE_W2_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mhe/cost.hpp"
#include "mhe/ensemble.hpp"
#include "mhe/errors.hpp"
#include "mhe/model.hpp"
#include "mhe/parallel.hpp"
#include "mhe/rng.hpp"

namespace mhe {

// Certified step-size window for the proximal recursion, derived from the
// declared smoothness l, drift bound L, and invariance radius alpha.
struct EtaWindow {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double eta) const { return eta > lo && eta < hi; }
};

inline EtaWindow eta_window(double l, double big_l, double alpha) {
  if (l <= 0.0) throw ConfigError("eta window requires l > 0");
  if (big_l < 0.0) throw ConfigError("eta window requires L >= 0");
  if (alpha <= 0.0) throw ConfigError("eta window requires alpha > 0");
  const double product = l * big_l;
  if (product > 0.5)
    throw InfeasibleError("no certified step size: l*L = " + std::to_string(product) +
                          " exceeds 1/2");
  EtaWindow w;
  w.lo = (1.0 - std::sqrt(1.0 - 2.0 * product)) / l;
  w.hi = std::min(alpha, 1.0 / l);
  if (w.lo >= w.hi)
    throw InfeasibleError("certified step-size window is empty: lo >= hi");
  return w;
}

namespace detail {

// Gradient descent on the strongly convex inner objective
//   Theta(z) = 0.5 ||z - v||^2 + eta * G(z),
// fixed step 1/(1 + eta*l), stopping when ||grad Theta|| <= tol. Requires
// eta*l < 1 so Theta is (1 - eta*l)-strongly convex with a unique minimizer.
inline Vec prox_minimize(const Vec& v, double eta, double l,
                         const std::function<Vec(const Vec&)>& grad_g, double tol,
                         int max_iters) {
  if (eta <= 0.0) throw ConfigError("prox step size must be positive");
  if (l <= 0.0) throw ConfigError("prox requires a positive declared smoothness l");
  if (eta * l >= 1.0)
    throw ConfigError("prox requires eta*l < 1 (inner objective must stay strongly convex)");
  if (tol <= 0.0 || max_iters < 1) throw ConfigError("prox tolerance/iteration budget invalid");

  const double step = 1.0 / (1.0 + eta * l);
  Vec z = v;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    const Vec grad_theta = (z - v) + eta * grad_g(z);
    residual = grad_theta.norm();
    if (residual <= tol) return z;
    z -= step * grad_theta;
  }
  const Vec grad_theta = (z - v) + eta * grad_g(z);
  residual = grad_theta.norm();
  if (residual <= tol) return z;
  throw ConvergenceError("prox inner solver exhausted " + std::to_string(max_iters) +
                             " iterations (residual " + std::to_string(residual) + ")",
                         max_iters, residual,
                         std::vector<double>(z.data(), z.data() + z.size()));
}

}  // namespace detail

// prox_{eta G}(v): unique minimizer of 0.5||z - v||^2 + eta*G(z), computed to
// inner gradient norm <= inner_tol.
inline Vec prox_step(const HorizonCost& cost, const Vec& v, double eta, double inner_tol = 1e-10,
                     int inner_max_iters = 200) {
  cost.validate();
  cost.model->check_state(v);
  return detail::prox_minimize(
      v, eta, cost.l_smooth, [&cost](const Vec& z) { return g_gradient(cost, z); }, inner_tol,
      inner_max_iters);
}

// Per-step privacy schedule for the sample update: tempering levels s_k in
// (0, 1] indexed by step (s[k-1] applies at step k), plus the seed of the
// post-update Gaussian noise channel.
struct DpSchedule {
  std::vector<double> s;
  std::uint64_t noise_seed = 0;
};

struct W2Config {
  double eta = 0.0;
  int n_window = 1;
  double inner_tol = 1e-10;
  int inner_max_iters = 200;
  enum class Mode { permissive, certified } mode = Mode::permissive;
  double alpha = 0.0;  // invariance radius, required in certified mode
  // Declared smoothness overrides applied to every window cost (0 keeps the
  // Lipschitz-chain default).
  double declared_l = 0.0;
  double declared_L = 0.0;
  double declared_lw = 0.0;
  std::optional<DpSchedule> dp;
  int threads = 1;
};

namespace detail {

inline void apply_declared_smoothness(HorizonCost& cost, const W2Config& config) {
  if (config.declared_l > 0.0) cost.l_smooth = config.declared_l;
  if (config.declared_L > 0.0) cost.drift_L = config.declared_L;
  if (config.declared_lw > 0.0) cost.l_w = config.declared_lw;
}

inline void check_w2_config(const W2Config& config, const HorizonCost& cost) {
  if (config.eta <= 0.0) throw ConfigError("step size eta must be positive");
  if (config.eta * cost.l_smooth >= 1.0)
    throw ConfigError("eta*l must stay below 1 for the proximal update");
  if (config.mode == W2Config::Mode::certified) {
    const EtaWindow w = eta_window(cost.l_smooth, cost.drift_L, config.alpha);
    if (!w.contains(config.eta))
      throw ConfigError("certified mode: eta outside the certified window (" +
                        std::to_string(w.lo) + ", " + std::to_string(w.hi) + ")");
  }
  if (config.dp) {
    for (double s : config.dp->s)
      if (!(s > 0.0 && s <= 1.0))
        throw ConfigError("privacy schedule levels must lie in (0, 1]");
  }
}

inline double dp_level_for_step(const DpSchedule& dp, int k) {
  if (k < 1 || k > static_cast<int>(dp.s.size()))
    throw ConfigError("privacy schedule does not cover step " + std::to_string(k));
  return dp.s[static_cast<std::size_t>(k - 1)];
}

// Entropy-regularized sample channel: after the proximal map, each sample
// receives Gaussian noise of std sqrt(2*eta*(1-s)/s). s = 1 draws nothing
// and leaves the sample bit-identical to the plain update.
inline void add_dp_noise(Vec& z, double eta, double s, std::uint64_t noise_seed, int k,
                         int sample_index) {
  if (s >= 1.0) return;
  const double sigma = std::sqrt(2.0 * eta * (1.0 - s) / s);
  Rng rng(derive_seed(noise_seed, static_cast<std::uint64_t>(k),
                      static_cast<std::uint64_t>(sample_index)));
  for (int i = 0; i < z.size(); ++i) z(i) += sigma * rng.normal();
}

}  // namespace detail

// One ensemble update: every sample moves z -> prox_{eta G}(f0(z)), then
// through the optional privacy noise channel. Samples are independent, so the
// loop parallelizes; per-(step, sample) derived seeds keep the result
// identical across thread counts.
inline Ensemble w2_step(const Ensemble& ensemble, const HorizonCost& cost,
                        const W2Config& config) {
  ensemble.require_nonempty();
  cost.validate();
  detail::check_w2_config(config, cost);
  const int k = cost.base_index;
  const int n = ensemble.size();
  Ensemble next;
  next.points.assign(static_cast<std::size_t>(n), Vec());
  parallel_for(n, config.threads, [&](int i) {
    const Vec anchor = cost.model->f0(ensemble.points[static_cast<std::size_t>(i)]);
    Vec z;
    try {
      z = prox_step(cost, anchor, config.eta, config.inner_tol, config.inner_max_iters);
    } catch (const ConvergenceError& err) {
      throw ConvergenceError("sample " + std::to_string(i) + " at step " + std::to_string(k) +
                                 ": " + err.what(),
                             err.iterations, err.residual, err.last_iterate);
    }
    if (config.dp) {
      const double s = detail::dp_level_for_step(*config.dp, k);
      detail::add_dp_noise(z, config.eta, s, config.dp->noise_seed, k, i);
    }
    next.points[static_cast<std::size_t>(i)] = std::move(z);
  });
  return next;
}

// Telemetry for one estimator step: mean estimate plus per-sample window cost
// values and gradient norms evaluated at the updated samples.
struct W2StepRecord {
  int k = 0;
  Vec mean;
  std::vector<double> costs;
  std::vector<double> grad_norms;
};

struct W2RunResult {
  std::vector<Ensemble> ensembles;  // index k = 0..T
  std::vector<W2StepRecord> steps;  // steps 1..T

  std::vector<Vec> means() const {
    std::vector<Vec> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.mean);
    return out;
  }
};

/// Full estimator pass over measurements ys (indices 0..T+N at least): at each
// step k the window cost covers ys[k+1..k+N].
inline W2RunResult run_w2(const SystemModel& model, const std::vector<Vec>& ys,
                          const Ensemble& x0_ensemble, const W2Config& config, int horizon_T) {
  model.validate();
  x0_ensemble.require_nonempty();
  if (horizon_T < 1) throw ConfigError("estimator horizon must be at least 1");
  if (static_cast<int>(ys.size()) < horizon_T + config.n_window + 1)
    throw ConfigError("measurement record too short: need T + N + 1 values");

  W2RunResult result;
  result.ensembles.reserve(static_cast<std::size_t>(horizon_T) + 1);
  result.ensembles.push_back(x0_ensemble);
  for (int k = 1; k <= horizon_T; ++k) {
    HorizonCost cost = make_window_cost(model, ys, k, config.n_window);
    detail::apply_declared_smoothness(cost, config);
    Ensemble next = w2_step(result.ensembles.back(), cost, config);

    W2StepRecord rec;
    rec.k = k;
    rec.mean = next.mean();
    rec.costs.resize(static_cast<std::size_t>(next.size()));
    rec.grad_norms.resize(static_cast<std::size_t>(next.size()));
    parallel_for(next.size(), config.threads, [&](int i) {
      const Vec& z = next.points[static_cast<std::size_t>(i)];
      rec.costs[static_cast<std::size_t>(i)] = g_value(cost, z);
      rec.grad_norms[static_cast<std::size_t>(i)] = g_gradient(cost, z).norm();
    });
    result.steps.push_back(std::move(rec));
    result.ensembles.push_back(std::move(next));
  }
  return result;
}

// Noise-aware reference estimator: anchored at f(z, w_{k-1}) and minimizing
// the disturbed window cost built from the recorded disturbances. With zero
// recorded disturbances it reproduces run_w2 bit for bit (same seeds, same
// arithmetic path).
inline W2RunResult run_reference_w2(const SystemModel& model, const Trajectory& traj,
                                    const Ensemble& x0_ensemble, const W2Config& config,
                                    int horizon_T) {
  model.validate();
  x0_ensemble.require_nonempty();
  if (horizon_T < 1) throw ConfigError("estimator horizon must be at least 1");
  const int n_window = config.n_window;
  if (static_cast<int>(traj.outputs.size()) < horizon_T + n_window + 1 ||
      static_cast<int>(traj.process_noise.size()) < horizon_T + n_window ||
      static_cast<int>(traj.measurement_noise.size()) < horizon_T + n_window + 1)
    throw ConfigError("trajectory record too short for the reference estimator");

  W2RunResult result;
  result.ensembles.push_back(x0_ensemble);
  for (int k = 1; k <= horizon_T; ++k) {
    HorizonCost cost = make_window_cost(model, traj.outputs, k, n_window);
    detail::apply_declared_smoothness(cost, config);
    detail::check_w2_config(config, cost);
    const std::vector<Vec> w_slice(traj.process_noise.begin() + k,
                                   traj.process_noise.begin() + k + n_window);
    const std::vector<Vec> v_slice(traj.measurement_noise.begin() + k + 1,
                                   traj.measurement_noise.begin() + k + 1 + n_window);
    auto grad = [&](const Vec& z) { return g_gradient_noisy(cost, z, w_slice, v_slice); };

    const Ensemble& prev = result.ensembles.back();
    Ensemble next;
    next.points.assign(static_cast<std::size_t>(prev.size()), Vec());
    parallel_for(prev.size(), config.threads, [&](int i) {
      const Vec anchor = cost.model->step(prev.points[static_cast<std::size_t>(i)],
                                          traj.process_noise[static_cast<std::size_t>(k - 1)]);
      Vec z = detail::prox_minimize(anchor, config.eta, cost.l_smooth, grad, config.inner_tol,
                                    config.inner_max_iters);
      if (config.dp) {
        const double s = detail::dp_level_for_step(*config.dp, k);
        detail::add_dp_noise(z, config.eta, s, config.dp->noise_seed, k, i);
      }
      next.points[static_cast<std::size_t>(i)] = std::move(z);
    });

    W2StepRecord rec;
    rec.k = k;
    rec.mean = next.mean();
    rec.costs.resize(static_cast<std::size_t>(next.size()));
    rec.grad_norms.resize(static_cast<std::size_t>(next.size()));
    parallel_for(next.size(), config.threads, [&](int i) {
      const Vec& z = next.points[static_cast<std::size_t>(i)];
      rec.costs[static_cast<std::size_t>(i)] = g_value_noisy(cost, z, w_slice, v_slice);
      rec.grad_norms[static_cast<std::size_t>(i)] =
          g_gradient_noisy(cost, z, w_slice, v_slice).norm();
    });
    result.steps.push_back(std::move(rec));
    result.ensembles.push_back(std::move(next));
  }
  return result;
}

// Geometric-series robustness certificate comparing the nominal estimator to
// the noise-aware reference.
struct RobustnessBound {
  double contraction_ratio = 0.0;  // c_f1 / (1 - eta*l)
  double c_k = 0.0;                // sum_{j=1..k} ratio^j
  double c_limit = 0.0;            // ratio/(1-ratio) when convergent
  double bound = 0.0;
  bool diverging = false;
};

inline RobustnessBound robustness_bound(double c_f1, double c_f2, double l, double l_w,
                                        double eta, int n_window, double w_bound, double v_bound,
                                        int k) {
  if (c_f1 <= 0.0) throw ConfigError("robustness bound requires c_f1 > 0");
  if (eta <= 0.0 || l <= 0.0 || eta * l >= 1.0)
    throw ConfigError("robustness bound requires eta > 0, l > 0, eta*l < 1");
  if (n_window < 1 || k < 0) throw ConfigError("robustness bound needs N >= 1, k >= 0");
  RobustnessBound rb;
  const double r = c_f1 / (1.0 - eta * l);
  rb.contraction_ratio = r;
  rb.diverging = r >= 1.0;
  rb.c_limit = rb.diverging ? std::numeric_limits<double>::infinity() : r / (1.0 - r);
  double power = 1.0;
  for (int j = 1; j <= k; ++j) {
    power *= r;
    rb.c_k += power;
  }
  rb.bound = (c_f2 / c_f1) * w_bound * rb.c_k +
             (eta * l_w * std::sqrt(static_cast<double>(n_window)) / c_f1) *
                 (w_bound + v_bound) * rb.c_k;
  return rb;
}

}  // namespace mhe

#endif  // MHE_W2_HPP

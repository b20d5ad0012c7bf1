#ifndef MHE_MODEL_HPP
#define MHE_MODEL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mhe/errors.hpp"
#include "mhe/rng.hpp"

namespace mhe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Central finite-difference Jacobian of g at x. Step 1e-6 * max(1, ||x||)
// balances truncation against roundoff at small state dimensions.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& g, const Vec& x, int out_dim) {
  const double step = 1e-6 * std::max(1.0, x.norm());
  Mat jac(out_dim, x.size());
  Vec xp = x;
  Vec xm = x;
  for (int j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + step;
    xm(j) = x(j) - step;
    jac.col(j) = (g(xp) - g(xm)) / (2.0 * step);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return jac;
}

// Discrete-time system x+ = f(x, w), y = h(x). The noise-free map
// f0(x) = f(x, 0) drives all predictors. Lipschitz fields are caller-declared
// metadata consumed by stability and privacy certificates; probe_lipschitz can
// sanity-check them but nothing in the library overrides them.
struct SystemModel {
  std::string name;
  int dim_state = 0;
  int dim_output = 0;
  int dim_noise = 0;

  std::function<Vec(const Vec&, const Vec&)> dynamics;       // f(x, w)
  std::function<Vec(const Vec&)> output;                     // h(x)
  std::function<Mat(const Vec&)> dynamics_jacobian;          // d/dx f(x, 0), optional
  std::function<Mat(const Vec&)> output_jacobian;            // d/dx h(x), optional

  double lip_dynamics_state = 1.0;  // ||f(x,0)-f(y,0)|| <= c ||x-y||
  double lip_dynamics_noise = 1.0;  // ||f(x,w1)-f(x,w2)|| <= c ||w1-w2||
  double lip_output = 1.0;          // ||h(x)-h(y)|| <= c ||x-y||

  void validate() const {
    if (dim_state < 1 || dim_output < 1 || dim_noise < 0)
      throw ConfigError("system dimensions invalid: need dim_state >= 1, dim_output >= 1");
    if (!dynamics || !output) throw ConfigError("system requires dynamics and output maps");
    if (lip_dynamics_state < 0 || lip_dynamics_noise < 0 || lip_output < 0)
      throw ConfigError("Lipschitz constants must be nonnegative");
  }

  void check_state(const Vec& x) const {
    if (x.size() != dim_state) throw ConfigError("state dimension mismatch for system " + name);
  }

  Vec zero_noise() const { return Vec::Zero(dim_noise); }

  Vec step(const Vec& x, const Vec& w) const {
    check_state(x);
    if (w.size() != dim_noise) throw ConfigError("disturbance dimension mismatch");
    return dynamics(x, w);
  }

  Vec f0(const Vec& x) const {
    check_state(x);
    return dynamics(x, zero_noise());
  }

  Vec measure(const Vec& x) const {
    check_state(x);
    return output(x);
  }

  Mat jac_f0(const Vec& x) const {
    if (dynamics_jacobian) return dynamics_jacobian(x);
    return fd_jacobian([this](const Vec& z) { return dynamics(z, zero_noise()); }, x, dim_state);
  }

  // State Jacobian of a disturbed step. The analytic Jacobian only covers the
  // noise-free map, so any nonzero w falls back to differencing.
  Mat jac_f_state(const Vec& x, const Vec& w) const {
    if (dynamics_jacobian && (w.size() == 0 || w.lpNorm<Eigen::Infinity>() == 0.0))
      return dynamics_jacobian(x);
    return fd_jacobian([this, &w](const Vec& z) { return dynamics(z, w); }, x, dim_state);
  }

  Mat jac_h(const Vec& x) const {
    if (output_jacobian) return output_jacobian(x);
    return fd_jacobian([this](const Vec& z) { return output(z); }, x, dim_output);
  }
};

// f0 applied `count` times; count = 0 returns x unchanged.
inline Vec iterate_f0(const SystemModel& model, Vec x, int count) {
  if (count < 0) throw ConfigError("iteration count must be nonnegative");
  for (int i = 0; i < count; ++i) x = model.f0(x);
  return x;
}

// Outputs along the noise-free flow: (h(x), h(f0(x)), ..., h(f0^T(x))),
// length horizon + 1.
inline std::vector<Vec> output_sequence(const SystemModel& model, const Vec& x, int horizon) {
  if (horizon < 0) throw ConfigError("output sequence horizon must be nonnegative");
  std::vector<Vec> seq;
  seq.reserve(static_cast<std::size_t>(horizon) + 1);
  Vec cur = x;
  seq.push_back(model.measure(cur));
  for (int j = 1; j <= horizon; ++j) {
    cur = model.f0(cur);
    seq.push_back(model.measure(cur));
  }
  return seq;
}

// Bounded zero-mean disturbance description. Bounds are Euclidean-norm caps
// honored by every draw. Defaults draw uniformly per coordinate and reject the
// rare draw outside the norm ball (no rejection ever happens for scalar
// noise, matching plain uniform sampling there).
struct NoiseSpec {
  double process_bound = 0.0;      // W
  double measurement_bound = 0.0;  // V
  std::function<Vec(Rng&)> process_sampler;      // optional override
  std::function<Vec(Rng&)> measurement_sampler;  // optional override
};

namespace detail {

inline Vec draw_default_bounded(Rng& rng, int dim, double bound) {
  Vec w = Vec::Zero(dim);
  if (bound == 0.0 || dim == 0) return w;
  for (int attempt = 0; attempt < 1024; ++attempt) {
    for (int i = 0; i < dim; ++i) w(i) = rng.uniform_sym(bound);
    if (w.norm() <= bound) return w;
  }
  throw NumericError("bounded noise sampling failed to land inside the norm ball");
}

inline Vec draw_noise(Rng& rng, const std::function<Vec(Rng&)>& custom, int dim, double bound) {
  if (bound < 0.0) throw ConfigError("noise bound must be nonnegative");
  if (!custom) return draw_default_bounded(rng, dim, bound);
  Vec w = custom(rng);
  if (w.size() != dim) throw ConfigError("noise sampler returned wrong dimension");
  if (w.norm() > bound + 1e-9 * std::max(1.0, bound))
    throw ConfigError("noise sampler violated its declared bound");
  return w;
}

}  // namespace detail

// One simulated run: states x_0..x_T, measured outputs y_k = h(x_k) + v_k,
// and the disturbance records w_0..w_{T-1}, v_0..v_T that produced them.
struct Trajectory {
  std::vector<Vec> states;
  std::vector<Vec> outputs;
  std::vector<Vec> process_noise;
  std::vector<Vec> measurement_noise;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(states.size()) - 1; }
};

// Simulates horizon steps from x0. Same seed, same trajectory, bit for bit.
inline Trajectory simulate(const SystemModel& model, const NoiseSpec& noise, const Vec& x0,
                           int horizon, std::uint64_t seed) {
  model.validate();
  model.check_state(x0);
  if (horizon < 1) throw ConfigError("simulation horizon must be at least 1");

  Rng rng_w(derive_seed(seed, 0x70));
  Rng rng_v(derive_seed(seed, 0x71));

  Trajectory traj;
  traj.seed = seed;
  traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.outputs.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.process_noise.reserve(static_cast<std::size_t>(horizon));
  traj.measurement_noise.reserve(static_cast<std::size_t>(horizon) + 1);

  Vec x = x0;
  traj.states.push_back(x);
  Vec v = detail::draw_noise(rng_v, noise.measurement_sampler, model.dim_output,
                             noise.measurement_bound);
  traj.measurement_noise.push_back(v);
  traj.outputs.push_back(model.measure(x) + v);

  for (int k = 0; k < horizon; ++k) {
    Vec w = detail::draw_noise(rng_w, noise.process_sampler, model.dim_noise,
                               noise.process_bound);
    traj.process_noise.push_back(w);
    x = model.step(x, w);
    traj.states.push_back(x);
    v = detail::draw_noise(rng_v, noise.measurement_sampler, model.dim_output,
                           noise.measurement_bound);
    traj.measurement_noise.push_back(v);
    traj.outputs.push_back(model.measure(x) + v);
  }
  return traj;
}

// Sampled lower bounds on the Lipschitz constants over a probe box. These are
// diagnostics for user-declared metadata, not replacements for it.
struct LipschitzProbe {
  double dynamics_state = 0.0;
  double dynamics_noise = 0.0;
  double output = 0.0;
};

inline LipschitzProbe probe_lipschitz(const SystemModel& model, const Vec& lo, const Vec& hi,
                                      double noise_bound, int pairs, std::uint64_t seed) {
  model.validate();
  if (lo.size() != model.dim_state || hi.size() != model.dim_state)
    throw ConfigError("probe box dimension mismatch");
  if (pairs < 1) throw ConfigError("probe needs at least one sample pair");

  Rng rng(derive_seed(seed, 0x11));
  auto draw_state = [&]() {
    Vec x(model.dim_state);
    for (int i = 0; i < model.dim_state; ++i) x(i) = rng.uniform(lo(i), hi(i));
    return x;
  };

  LipschitzProbe probe;
  for (int i = 0; i < pairs; ++i) {
    Vec x = draw_state();
    Vec y = draw_state();
    double dist = (x - y).norm();
    if (dist > 1e-12) {
      probe.dynamics_state =
          std::max(probe.dynamics_state, (model.f0(x) - model.f0(y)).norm() / dist);
      probe.output = std::max(probe.output, (model.measure(x) - model.measure(y)).norm() / dist);
    }
    if (noise_bound > 0.0 && model.dim_noise > 0) {
      Vec w1(model.dim_noise);
      Vec w2(model.dim_noise);
      for (int j = 0; j < model.dim_noise; ++j) {
        w1(j) = rng.uniform_sym(noise_bound);
        w2(j) = rng.uniform_sym(noise_bound);
      }
      double wdist = (w1 - w2).norm();
      if (wdist > 1e-12)
        probe.dynamics_noise = std::max(
            probe.dynamics_noise, (model.step(x, w1) - model.step(x, w2)).norm() / wdist);
    }
  }
  return probe;
}

}  // namespace mhe

#endif  // MHE_MODEL_HPP

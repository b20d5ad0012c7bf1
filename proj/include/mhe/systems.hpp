#ifndef MHE_SYSTEMS_HPP
#define MHE_SYSTEMS_HPP

#include <cmath>
#include <numbers>

#include "mhe/errors.hpp"
#include "mhe/model.hpp"

namespace mhe {

// Planar oscillator with a saturating restoring force, driven through the
// velocity channel and observed through position:
//   x1+ = x1 + tau * x2
//   x2+ = x2 - tau * x1 / (1 + x1^2 + x2^2) + w
//   y   = x1 + v
inline SystemModel make_benchmark2d(double tau = 0.1) {
  if (tau <= 0.0) throw ConfigError("benchmark2d requires tau > 0");
  SystemModel m;
  m.name = "benchmark2d";
  m.dim_state = 2;
  m.dim_output = 1;
  m.dim_noise = 1;
  m.dynamics = [tau](const Vec& x, const Vec& w) {
    Vec next(2);
    next(0) = x(0) + tau * x(1);
    next(1) = x(1) - tau * x(0) / (1.0 + x(0) * x(0) + x(1) * x(1)) + w(0);
    return next;
  };
  m.output = [](const Vec& x) {
    Vec y(1);
    y(0) = x(0);
    return y;
  };
  m.dynamics_jacobian = [tau](const Vec& x) {
    const double d = 1.0 + x(0) * x(0) + x(1) * x(1);
    Mat jac(2, 2);
    jac(0, 0) = 1.0;
    jac(0, 1) = tau;
    jac(1, 0) = -tau * (1.0 + x(1) * x(1) - x(0) * x(0)) / (d * d);
    jac(1, 1) = 1.0 + 2.0 * tau * x(0) * x(1) / (d * d);
    return jac;
  };
  m.output_jacobian = [](const Vec&) {
    Mat jac(1, 2);
    jac(0, 0) = 1.0;
    jac(0, 1) = 0.0;
    return jac;
  };
  // Declared contraction metadata: spectral norm at the origin plus headroom.
  m.lip_dynamics_state = std::sqrt(1.0 + tau * tau) * 1.01;
  m.lip_dynamics_noise = 1.0;
  m.lip_output = 1.0;
  return m;
}

namespace detail {

// Expansion map for the scalar sine system: slope 3 up to a * pi, slope 2
// beyond, joined by a C^1 cubic blend on a band of half-width `band` so the
// analytic derivative exists everywhere. The blend derivative is 3 - t for
// blend coordinate t in [0, 1], staying within [2, 3].
struct SineFlow {
  double knee;  // a * pi
  double band;

  double value(double x) const {
    const double x0 = knee - band;
    const double x1 = knee + band;
    if (x <= x0) return 3.0 * x;
    if (x >= x1) return 2.0 * x + knee;
    const double t = (x - x0) / (x1 - x0);
    const double p0 = 3.0 * x0;
    const double p1 = 2.0 * x1 + knee;
    const double h00 = (2.0 * t - 3.0) * t * t + 1.0;
    const double h10 = ((t - 2.0) * t + 1.0) * t;
    const double h01 = (3.0 - 2.0 * t) * t * t;
    const double h11 = (t - 1.0) * t * t;
    const double width = x1 - x0;
    return h00 * p0 + h10 * width * 3.0 + h01 * p1 + h11 * width * 2.0;
  }

  double slope(double x) const {
    const double x0 = knee - band;
    const double x1 = knee + band;
    if (x <= x0) return 3.0;
    if (x >= x1) return 2.0;
    const double t = (x - x0) / (x1 - x0);
    return 3.0 - t;
  }
};

}  // namespace detail

// Scalar expanding flow observed through sin(x). The two expansion rates
// straddle the knee at a * pi; the output wraps the growing state back into
// [-1, 1], which starves observability along trajectories that keep landing
// near multiples of pi.
inline SystemModel make_sine1d(double a = 2.0, double band = 0.01) {
  if (a <= 0.0 || band <= 0.0) throw ConfigError("sine1d requires a > 0 and band > 0");
  detail::SineFlow flow{a * std::numbers::pi, band};
  SystemModel m;
  m.name = "sine1d";
  m.dim_state = 1;
  m.dim_output = 1;
  m.dim_noise = 1;
  m.dynamics = [flow](const Vec& x, const Vec& w) {
    Vec next(1);
    next(0) = flow.value(x(0)) + w(0);
    return next;
  };
  m.output = [](const Vec& x) {
    Vec y(1);
    y(0) = std::sin(x(0));
    return y;
  };
  m.dynamics_jacobian = [flow](const Vec& x) {
    Mat jac(1, 1);
    jac(0, 0) = flow.slope(x(0));
    return jac;
  };
  m.output_jacobian = [](const Vec& x) {
    Mat jac(1, 1);
    jac(0, 0) = std::cos(x(0));
    return jac;
  };
  m.lip_dynamics_state = 3.0;
  m.lip_dynamics_noise = 1.0;
  m.lip_output = 1.0;
  return m;
}

// Scalar linear system x+ = gain * x + w, y = x + v. Its Lipschitz metadata
// is exact, which makes it the reference case for certificate arithmetic.
inline SystemModel make_linear1d(double gain = 0.9) {
  SystemModel m;
  m.name = "linear1d";
  m.dim_state = 1;
  m.dim_output = 1;
  m.dim_noise = 1;
  m.dynamics = [gain](const Vec& x, const Vec& w) {
    Vec next(1);
    next(0) = gain * x(0) + w(0);
    return next;
  };
  m.output = [](const Vec& x) { return x; };
  m.dynamics_jacobian = [gain](const Vec&) {
    Mat jac(1, 1);
    jac(0, 0) = gain;
    return jac;
  };
  m.output_jacobian = [](const Vec&) {
    Mat jac(1, 1);
    jac(0, 0) = 1.0;
    return jac;
  };
  m.lip_dynamics_state = std::abs(gain);
  m.lip_dynamics_noise = 1.0;
  m.lip_output = 1.0;
  return m;
}

// Registry used by the CLI and config loader.
inline SystemModel make_system(const std::string& name) {
  if (name == "benchmark2d") return make_benchmark2d();
  if (name == "sine1d") return make_sine1d();
  if (name == "linear1d") return make_linear1d();
  throw ConfigError("unknown system '" + name + "' (known: benchmark2d, sine1d, linear1d)");
}

}  // namespace mhe

#endif  // MHE_SYSTEMS_HPP

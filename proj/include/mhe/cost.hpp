#ifndef MHE_COST_HPP
#define MHE_COST_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "mhe/errors.hpp"
#include "mhe/model.hpp"
#include "mhe/rng.hpp"

namespace mhe {

// Per-step residual penalty r^T W r with symmetric positive definite W
// (identity when absent).
struct StageCost {
  std::optional<Mat> weight;

  double operator()(const Vec& r) const {
    if (!weight) return r.squaredNorm();
    return r.dot(*weight * r);
  }

  Vec gradient(const Vec& r) const {
    if (!weight) return 2.0 * r;
    return 2.0 * (*weight * r);
  }

  // Largest eigenvalue of the stage Hessian 2W; 2 for the identity weight.
  double hessian_top(int dim) const {
    if (!weight) return 2.0;
    if (weight->rows() != dim || weight->cols() != dim)
      throw ConfigError("stage weight dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Mat> es(*weight);
    if (es.info() != Eigen::Success) throw NumericError("stage weight eigendecomposition failed");
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw ConfigError("stage weight must be positive definite");
    return 2.0 * es.eigenvalues().maxCoeff();
  }
};

// Sliding-window data-fit cost anchored at time k:
//
//   G(z) = sum_{j=1..N} stage( h(f0^j(z)) - y_{k+j} )
//
// `window` holds the N measurements y_{k+1}..y_{k+N}; predictions start one
// step ahead of the anchor so the window never scores the anchor itself.
// The smoothness fields are declared analysis metadata consumed by step-size
// and privacy certificates; estimate_smoothness produces sampled estimates
// for cross-checking them but nothing here overwrites a declaration.
struct HorizonCost {
  const SystemModel* model = nullptr;
  StageCost stage;
  std::vector<Vec> window;
  int base_index = 0;

  double l_smooth = 0.0;  // gradient Lipschitz bound for G
  double drift_L = 0.0;   // bound on ||grad G|| along the anchor path
  double l_w = 0.0;       // Lipschitz bound of the disturbed cost in (w, v)

  int horizon() const { return static_cast<int>(window.size()); }

  void validate() const {
    if (model == nullptr) throw ConfigError("horizon cost requires a system model");
    if (window.empty()) throw ConfigError("horizon cost requires a nonempty window");
    for (const Vec& y : window)
      if (y.size() != model->dim_output)
        throw ConfigError("window measurement dimension mismatch");
  }
};

namespace detail {

// Shared evaluation core. The noise-free entry points pass zero disturbance
// records through the same arithmetic as the disturbed ones, so the two
// agree bit for bit when every w and v is zero.
inline double cost_value_core(const HorizonCost& cost, const Vec& z, const std::vector<Vec>& w,
                              const std::vector<Vec>& v) {
  const SystemModel& m = *cost.model;
  double total = 0.0;
  Vec x = z;
  for (int j = 0; j < cost.horizon(); ++j) {
    x = m.step(x, w[static_cast<std::size_t>(j)]);
    const Vec pred = m.measure(x) + v[static_cast<std::size_t>(j)];
    total += cost.stage(pred - cost.window[static_cast<std::size_t>(j)]);
  }
  return total;
}

inline Vec cost_gradient_core(const HorizonCost& cost, const Vec& z, const std::vector<Vec>& w,
                              const std::vector<Vec>& v) {
  const SystemModel& m = *cost.model;
  Vec grad = Vec::Zero(m.dim_state);
  Mat chain = Mat::Identity(m.dim_state, m.dim_state);  // d x_j / d z
  Vec x = z;
  for (int j = 0; j < cost.horizon(); ++j) {
    chain = m.jac_f_state(x, w[static_cast<std::size_t>(j)]) * chain;
    x = m.step(x, w[static_cast<std::size_t>(j)]);
    const Vec pred = m.measure(x) + v[static_cast<std::size_t>(j)];
    const Vec stage_grad = cost.stage.gradient(pred - cost.window[static_cast<std::size_t>(j)]);
    grad += chain.transpose() * (m.jac_h(x).transpose() * stage_grad);
  }
  return grad;
}

inline std::vector<Vec> zero_records(int count, int dim) {
  return std::vector<Vec>(static_cast<std::size_t>(count), Vec::Zero(dim));
}

inline void check_records(const HorizonCost& cost, const std::vector<Vec>& w,
                          const std::vector<Vec>& v) {
  const int n = cost.horizon();
  if (static_cast<int>(w.size()) != n || static_cast<int>(v.size()) != n)
    throw ConfigError("disturbance records must match the window length");
  for (const Vec& wi : w)
    if (wi.size() != cost.model->dim_noise)
      throw ConfigError("process disturbance dimension mismatch");
  for (const Vec& vi : v)
    if (vi.size() != cost.model->dim_output)
      throw ConfigError("measurement disturbance dimension mismatch");
}

}  // namespace detail

inline double g_value(const HorizonCost& cost, const Vec& z) {
  cost.validate();
  cost.model->check_state(z);
  return detail::cost_value_core(cost, z,
                                 detail::zero_records(cost.horizon(), cost.model->dim_noise),
                                 detail::zero_records(cost.horizon(), cost.model->dim_output));
}

inline Vec g_gradient(const HorizonCost& cost, const Vec& z) {
  cost.validate();
  cost.model->check_state(z);
  return detail::cost_gradient_core(
      cost, z, detail::zero_records(cost.horizon(), cost.model->dim_noise),
      detail::zero_records(cost.horizon(), cost.model->dim_output));
}

// Disturbed cost: the window prediction runs through f(., w_j) and each
// predicted output carries its measurement disturbance v_j. Zero records
// reproduce g_value exactly.
inline double g_value_noisy(const HorizonCost& cost, const Vec& z, const std::vector<Vec>& w,
                            const std::vector<Vec>& v) {
  cost.validate();
  cost.model->check_state(z);
  detail::check_records(cost, w, v);
  return detail::cost_value_core(cost, z, w, v);
}

inline Vec g_gradient_noisy(const HorizonCost& cost, const Vec& z, const std::vector<Vec>& w,
                            const std::vector<Vec>& v) {
  cost.validate();
  cost.model->check_state(z);
  detail::check_records(cost, w, v);
  return detail::cost_gradient_core(cost, z, w, v);
}

// Builds the cost anchored at index k over measurements ys[k+1..k+n]; ys must
// extend through k+n. Smoothness metadata defaults to a Lipschitz chain bound
// from the model declarations (callers may overwrite with sharper values).
inline HorizonCost make_window_cost(const SystemModel& model, const std::vector<Vec>& ys, int k,
                                    int n, StageCost stage = {}) {
  if (n < 1) throw ConfigError("window length must be at least 1");
  if (k < 0 || k + n >= static_cast<int>(ys.size()))
    throw ConfigError("window [k+1, k+n] runs past the measurement record");
  HorizonCost cost;
  cost.model = &model;
  cost.stage = std::move(stage);
  cost.base_index = k;
  cost.window.assign(ys.begin() + k + 1, ys.begin() + k + 1 + n);
  const double top = cost.stage.hessian_top(model.dim_output);
  double chain = 0.0;
  double factor = 1.0;
  for (int j = 1; j <= n; ++j) {
    factor *= model.lip_dynamics_state;
    const double path = model.lip_output * factor;
    chain += path * path;
  }
  cost.l_smooth = top * chain;
  cost.l_w = cost.l_smooth;
  cost.validate();
  return cost;
}

// Sampled smoothness estimates over a probe box: gradient Lipschitz ratio,
// peak gradient norm, and sensitivity of the disturbed cost to (w, v).
struct SmoothnessEstimate {
  double l_hat = 0.0;
  double L_hat = 0.0;
  double l_w_hat = 0.0;
};

inline SmoothnessEstimate estimate_smoothness(const HorizonCost& cost, const Vec& lo,
                                              const Vec& hi, int samples, std::uint64_t seed) {
  cost.validate();
  const SystemModel& m = *cost.model;
  if (lo.size() != m.dim_state || hi.size() != m.dim_state)
    throw ConfigError("probe box dimension mismatch");
  if (samples < 2) throw ConfigError("smoothness probe needs at least two samples");

  Rng rng(derive_seed(seed, 0x21));
  auto draw_state = [&]() {
    Vec x(m.dim_state);
    for (int i = 0; i < m.dim_state; ++i) x(i) = rng.uniform(lo(i), hi(i));
    return x;
  };
  auto draw_records = [&](int dim, double bound) {
    std::vector<Vec> rec;
    rec.reserve(static_cast<std::size_t>(cost.horizon()));
    for (int j = 0; j < cost.horizon(); ++j) {
      Vec r(dim);
      for (int i = 0; i < dim; ++i) r(i) = rng.uniform_sym(bound);
      rec.push_back(std::move(r));
    }
    return rec;
  };
  SmoothnessEstimate est;
  for (int i = 0; i < samples; ++i) {
    const Vec x = draw_state();
    const Vec y = draw_state();
    const Vec gx = g_gradient(cost, x);
    est.L_hat = std::max(est.L_hat, gx.norm());
    const double dist = (x - y).norm();
    if (dist > 1e-12)
      est.l_hat = std::max(est.l_hat, (gx - g_gradient(cost, y)).norm() / dist);

    const auto w1 = draw_records(m.dim_noise, 0.5);
    const auto v1 = draw_records(m.dim_output, 0.5);
    const auto w2 = draw_records(m.dim_noise, 0.5);
    const auto v2 = draw_records(m.dim_output, 0.5);
    double acc = 0.0;
    for (std::size_t j = 0; j < w1.size(); ++j) acc += (w1[j] - w2[j]).squaredNorm();
    for (std::size_t j = 0; j < v1.size(); ++j) acc += (v1[j] - v2[j]).squaredNorm();
    const double dd = std::sqrt(acc);
    if (dd > 1e-12) {
      const double c1 = g_value_noisy(cost, x, w1, v1);
      const double c2 = g_value_noisy(cost, x, w2, v2);
      est.l_w_hat = std::max(est.l_w_hat, std::abs(c1 - c2) / dd);
    }
  }
  return est;
}

}  // namespace mhe

#endif  // MHE_COST_HPP

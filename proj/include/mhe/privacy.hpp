#ifndef MHE_PRIVACY_HPP
#define MHE_PRIVACY_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mhe/cost.hpp"
#include "mhe/errors.hpp"
#include "mhe/model.hpp"
#include "mhe/oracle.hpp"

namespace mhe {

// Analysis constants shared by the privacy calculators. All of them are
// declared (or measured upstream and then declared); the calculators never
// probe the model themselves.
struct PrivacyConstants {
  double l = 0.0;        // window-cost smoothness
  double eta = 0.0;      // estimator step size
  double c_f1 = 0.0;     // dynamics Lipschitz constant
  double diam_k0 = 0.0;  // support diameter of the initial ensemble
  std::vector<double> alpha;                // per-step cost-gap floors; empty means all zero
  std::function<double(double)> q_modulus;  // modulus for the W2 sensitivity term

  double alpha_at(int k) const {
    return k >= 0 && k < static_cast<int>(alpha.size()) ? alpha[static_cast<std::size_t>(k)]
                                                        : 0.0;
  }

  double q(double delta) const { return q_modulus ? q_modulus(delta) : delta; }

  void validate() const {
    if (l <= 0.0 || eta <= 0.0 || c_f1 <= 0.0)
      throw ConfigError("privacy constants require l, eta, c_f1 > 0");
    if (diam_k0 < 0.0) throw ConfigError("privacy constants require diam_k0 >= 0");
    for (double a : alpha)
      if (a < 0.0) throw ConfigError("alpha floors must be nonnegative");
  }
};

// A complete privacy request: budget, adjacency radius, tempering schedule
// s_1..s_T, and the constants the theorems consume.
struct PrivacySchedule {
  double epsilon = 0.0;
  double delta = 0.0;
  std::vector<double> s;
  int horizon_T = 0;
  PrivacyConstants constants;

  double s_at(int k) const {  // k in 1..horizon_T
    if (k < 1 || k > static_cast<int>(s.size()))
      throw ConfigError("schedule does not cover step " + std::to_string(k));
    return s[static_cast<std::size_t>(k - 1)];
  }

  void validate() const {
    if (epsilon <= 0.0) throw ConfigError("privacy budget epsilon must be positive");
    if (delta < 0.0) throw ConfigError("adjacency radius delta must be nonnegative");
    if (horizon_T < 1) throw ConfigError("privacy horizon must be at least 1");
    if (static_cast<int>(s.size()) < horizon_T)
      throw ConfigError("schedule shorter than its horizon");
    for (double v : s)
      if (!(v > 0.0 && v <= 1.0)) throw ConfigError("schedule levels must lie in (0, 1]");
    constants.validate();
  }
};

// Largest admissible final tempering level for the single-step (pointwise)
// sensitivity bound of the proximal estimator:
//   s_T <= eps_T / (eps_T + c^T diam (eta l delta + c^T diam q(delta))).
// delta = 0 gives exactly 1.
inline double w2_pointwise_s_bound(double eps_t, double delta, double l, double eta, double c_f1,
                                   double diam_k0, int horizon_T,
                                   const std::function<double(double)>& q_modulus = {}) {
  if (eps_t <= 0.0) throw ConfigError("eps_T must be positive");
  if (delta < 0.0 || l <= 0.0 || eta <= 0.0 || c_f1 <= 0.0 || diam_k0 < 0.0 || horizon_T < 0)
    throw ConfigError("w2_pointwise_s_bound: invalid constants");
  const double q = q_modulus ? q_modulus(delta) : delta;
  const double c_pow = std::pow(c_f1, horizon_T);
  const double denom = eps_t + c_pow * diam_k0 * (eta * l * delta + c_pow * diam_k0 * q);
  return std::min(1.0, eps_t / denom);
}

// Outcome of a schedule feasibility check. `trivial` marks the degenerate
// cases (delta = 0 or a vanishing sensitivity coefficient) where the bound
// constrains nothing and the slack is infinite.
struct FeasibilityVerdict {
  bool feasible = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool trivial = false;
};

namespace detail {

inline double kl_sensitivity_coefficient(const PrivacySchedule& sched) {
  // max over k = 0..T of alpha_k + l * c^k * delta * diam.
  double best = 0.0;
  double c_pow = 1.0;
  for (int k = 0; k <= sched.horizon_T; ++k) {
    best = std::max(best, sched.constants.alpha_at(k) +
                              sched.constants.l * c_pow * sched.delta * sched.constants.diam_k0);
    c_pow *= sched.constants.c_f1;
  }
  return best;
}

// LHS of the pointwise tempering bound: sum over k of the suffix product
// s_k * s_{k+1} * ... * s_T.
inline double kl_pointwise_lhs(const PrivacySchedule& sched) {
  double suffix = 1.0;
  double lhs = 0.0;
  for (int k = sched.horizon_T; k >= 1; --k) {
    suffix *= sched.s_at(k);
    lhs += suffix;
  }
  return lhs;
}

// LHS of the whole-horizon tempering bound: sum over k of a_k where
// a_k = s_k (1 + a_{k-1}); equals the double sum of products over [l..k].
inline double kl_horizon_lhs(const PrivacySchedule& sched) {
  double a = 0.0;
  double lhs = 0.0;
  for (int k = 1; k <= sched.horizon_T; ++k) {
    a = sched.s_at(k) * (1.0 + a);
    lhs += a;
  }
  return lhs;
}

inline FeasibilityVerdict make_verdict(double lhs, double rhs, bool trivial) {
  FeasibilityVerdict v;
  v.lhs = lhs;
  v.rhs = rhs;
  v.trivial = trivial;
  v.feasible = trivial || lhs <= rhs;
  v.slack = trivial ? std::numeric_limits<double>::infinity() : rhs - lhs;
  return v;
}

}  // namespace detail

// Whole-horizon budget for the proximal estimator's noise channel:
//   sum_k (s_k / (1 - s_k)) c^k <= eps / (l delta diam).
// Any s_k = 1 with delta > 0 makes the left side infinite.
inline FeasibilityVerdict w2_horizon_feasible(const PrivacySchedule& sched) {
  sched.validate();
  if (sched.delta == 0.0 || sched.constants.diam_k0 == 0.0)
    return detail::make_verdict(0.0, std::numeric_limits<double>::infinity(), true);
  double lhs = 0.0;
  double c_pow = 1.0;
  for (int k = 1; k <= sched.horizon_T; ++k) {
    c_pow *= sched.constants.c_f1;
    const double s = sched.s_at(k);
    if (s >= 1.0) {
      lhs = std::numeric_limits<double>::infinity();
      break;
    }
    lhs += s / (1.0 - s) * c_pow;
  }
  const double rhs =
      sched.epsilon / (sched.constants.l * sched.delta * sched.constants.diam_k0);
  return detail::make_verdict(lhs, rhs, false);
}

// Final-marginal budget for the tempered filter:
//   sum_{k=1..T} prod_{i=k..T} s_i <= eps_T / (2 eta max_k(alpha_k + l c^k delta diam)).
inline FeasibilityVerdict kl_pointwise_feasible(const PrivacySchedule& sched) {
  sched.validate();
  const double coeff = detail::kl_sensitivity_coefficient(sched);
  const double lhs = detail::kl_pointwise_lhs(sched);
  if (coeff == 0.0)
    return detail::make_verdict(lhs, std::numeric_limits<double>::infinity(), true);
  return detail::make_verdict(lhs, sched.epsilon / (2.0 * sched.constants.eta * coeff), false);
}

// Whole-horizon budget for the tempered filter: the double sum
//   sum_{k=1..T} sum_{l=1..k} prod_{i=l..k} s_i
// against the same sensitivity coefficient.
inline FeasibilityVerdict kl_horizon_feasible(const PrivacySchedule& sched) {
  sched.validate();
  const double coeff = detail::kl_sensitivity_coefficient(sched);
  const double lhs = detail::kl_horizon_lhs(sched);
  if (coeff == 0.0)
    return detail::make_verdict(lhs, std::numeric_limits<double>::infinity(), true);
  return detail::make_verdict(lhs, sched.epsilon / (2.0 * sched.constants.eta * coeff), false);
}

enum class ScheduleKind { w2_horizon, kl_pointwise, kl_horizon };

inline std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::w2_horizon: return "w2_horizon";
    case ScheduleKind::kl_pointwise: return "kl_pointwise";
    case ScheduleKind::kl_horizon: return "kl_horizon";
  }
  return "unknown";
}

inline ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "w2_horizon") return ScheduleKind::w2_horizon;
  if (name == "kl_pointwise") return ScheduleKind::kl_pointwise;
  if (name == "kl_horizon") return ScheduleKind::kl_horizon;
  throw ConfigError("unknown schedule kind '" + name +
                    "' (known: w2_horizon, kl_pointwise, kl_horizon)");
}

// Largest constant tempering level s in (0, 1] that keeps the selected bound
// feasible over horizon T, found by bisection to 1e-10. Returns 1 when the
// bound does not constrain the schedule (for example delta = 0).
inline double max_s_schedule(ScheduleKind kind, double epsilon, double delta,
                             const PrivacyConstants& constants, int horizon_T) {
  if (horizon_T < 1) throw ConfigError("schedule horizon must be at least 1");
  constants.validate();
  auto feasible_at = [&](double s) {
    PrivacySchedule sched;
    sched.epsilon = epsilon;
    sched.delta = delta;
    sched.horizon_T = horizon_T;
    sched.constants = constants;
    sched.s.assign(static_cast<std::size_t>(horizon_T), s);
    switch (kind) {
      case ScheduleKind::w2_horizon: return w2_horizon_feasible(sched).feasible;
      case ScheduleKind::kl_pointwise: return kl_pointwise_feasible(sched).feasible;
      case ScheduleKind::kl_horizon: return kl_horizon_feasible(sched).feasible;
    }
    return false;
  };
  if (feasible_at(1.0)) return 1.0;
  double lo = 0.0;  // limit point: every bound's LHS vanishes as s -> 0
  double hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (feasible_at(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// Empirical privacy audit on the exact grid recursion: runs the tempered
// filter under two adjacent measurement sequences and traces the
// max-divergence between the resulting densities, next to the theorem's
// budget for the final marginal.
struct DpGridReport {
  std::vector<double> dmax_trace;
  double final_dmax = 0.0;
  double epsilon_bound = 0.0;      // 2 eta coeff * pointwise LHS of the schedule
  bool support_mismatch = false;   // any step produced mismatched supports
};

inline DpGridReport dp_verify_on_grid(const SystemModel& model, const GridDensity& prior,
                                      const std::vector<Vec>& ys, const std::vector<Vec>& ys_alt,
                                      const PrivacySchedule& sched, int n_window,
                                      double escape_tol = 0.01) {
  sched.validate();
  model.validate();
  prior.validate();
  if (!prior.normalized) throw ConfigError("grid audit requires a normalized prior density");
  if (n_window < 1) throw ConfigError("grid audit window must be at least 1");
  const int need = sched.horizon_T + n_window + 1;
  if (static_cast<int>(ys.size()) < need || static_cast<int>(ys_alt.size()) < need)
    throw ConfigError("grid audit needs T + N + 1 measurements in both sequences");
  for (std::size_t k = 0; k < ys.size() && k < ys_alt.size(); ++k) {
    const double gap = (ys[k] - ys_alt[k]).norm();
    if (gap > sched.delta + 1e-12)
      throw ConfigError("measurement sequences are not delta-adjacent at index " +
                        std::to_string(k));
  }

  DpGridReport report;
  report.epsilon_bound = 2.0 * sched.constants.eta * detail::kl_sensitivity_coefficient(sched) *
                         detail::kl_pointwise_lhs(sched);
  GridDensity rho = prior;
  GridDensity rho_alt = prior;
  for (int k = 1; k <= sched.horizon_T; ++k) {
    const HorizonCost cost = make_window_cost(model, ys, k, n_window);
    const HorizonCost cost_alt = make_window_cost(model, ys_alt, k, n_window);
    const double s = sched.s_at(k);
    rho = grid_filter_step(rho, model, cost, sched.constants.eta, s, escape_tol);
    rho_alt = grid_filter_step(rho_alt, model, cost_alt, sched.constants.eta, s, escape_tol);
    const DivergenceResult div = max_divergence(rho, rho_alt);
    report.support_mismatch = report.support_mismatch || div.support_mismatch;
    report.dmax_trace.push_back(div.value);
  }
  report.final_dmax = report.dmax_trace.empty() ? 0.0 : report.dmax_trace.back();
  return report;
}

}  // namespace mhe

#endif  // MHE_PRIVACY_HPP

#ifndef MHE_OBSERVABILITY_HPP
#define MHE_OBSERVABILITY_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "mhe/cost.hpp"
#include "mhe/errors.hpp"
#include "mhe/model.hpp"
#include "mhe/rng.hpp"

namespace mhe {

// Jacobian of the stacked output map x -> (h(x), h(f0(x)), ..., h(f0^T(x))),
// assembled block by block with a running chain-rule product. Size
// (T+1) * dim_output by dim_state.
inline Mat stacked_jacobian(const SystemModel& model, const Vec& x, int horizon) {
  model.check_state(x);
  if (horizon < 0) throw ConfigError("stacked jacobian horizon must be nonnegative");
  Mat stacked((horizon + 1) * model.dim_output, model.dim_state);
  Mat chain = Mat::Identity(model.dim_state, model.dim_state);
  Vec cur = x;
  for (int j = 0; j <= horizon; ++j) {
    if (j > 0) {
      chain = model.jac_f0(cur) * chain;
      cur = model.f0(cur);
    }
    stacked.middleRows(j * model.dim_output, model.dim_output) = model.jac_h(cur) * chain;
  }
  return stacked;
}

// Numerical rank of the stacked jacobian. A singular value counts when it
// clears both the relative threshold tol * sigma_max and a small absolute
// floor; the floor keeps pure roundoff residue (cosines at exact zeros of the
// output map evaluate to ~1e-16, not 0) from inflating the rank, which a
// purely relative threshold cannot do when every singular value is residue.
inline int check_rank(const SystemModel& model, const Vec& x, int horizon, double tol = 1e-8,
                      double abs_floor = 1e-7) {
  if (tol <= 0.0) throw ConfigError("rank tolerance must be positive");
  const Mat stacked = stacked_jacobian(model, x, horizon);
  Eigen::JacobiSVD<Mat> svd(stacked);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = std::max(tol * sv(0), abs_floor);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank;
}

// One probe state that fell short of full rank at some scanned horizon.
struct RankFailure {
  Vec state;
  int horizon = 0;
  int rank = 0;
};

// Result of a horizon scan over a probe grid.
struct ObservabilityReport {
  int horizon_tested = 0;                    // largest scanned horizon
  std::vector<Vec> grid;                     // probe states
  std::vector<int> ranks;                    // per-state rank at horizon_tested
  std::optional<int> min_horizon_estimate;   // first horizon with full rank everywhere
  std::vector<RankFailure> failures;         // every (state, horizon) below full rank
  std::vector<std::vector<int>> rank_table;  // rank_table[i][t]: state i at horizon t
};

// Scans horizons 0..t_max over the probe states; the minimum-horizon estimate
// is the first horizon at which every probe state reaches full state rank.
inline ObservabilityReport find_min_horizon(const SystemModel& model, const std::vector<Vec>& grid,
                                            int t_max, double tol = 1e-8,
                                            double abs_floor = 1e-7) {
  if (grid.empty()) throw ConfigError("minimum-horizon scan requires a nonempty probe grid");
  if (t_max < 0) throw ConfigError("scan horizon must be nonnegative");
  ObservabilityReport report;
  report.horizon_tested = t_max;
  report.grid = grid;
  report.rank_table.assign(grid.size(), std::vector<int>(static_cast<std::size_t>(t_max) + 1, 0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int t = 0; t <= t_max; ++t) {
      const int r = check_rank(model, grid[i], t, tol, abs_floor);
      report.rank_table[i][static_cast<std::size_t>(t)] = r;
      if (r < model.dim_state) report.failures.push_back({grid[i], t, r});
    }
    report.ranks.push_back(report.rank_table[i][static_cast<std::size_t>(t_max)]);
  }
  for (int t = 0; t <= t_max; ++t) {
    bool all_full = true;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (report.rank_table[i][static_cast<std::size_t>(t)] < model.dim_state) {
        all_full = false;
        break;
      }
    if (all_full) {
      report.min_horizon_estimate = t;
      break;
    }
  }
  return report;
}

// Rank probe along disturbed trajectories: the stacked map is evaluated with
// sampled bounded process noise, one rank per draw. Full rank across draws
// supports (but cannot prove) almost-sure observability.
inline std::vector<int> check_rank_noisy(const SystemModel& model, const NoiseSpec& noise,
                                         const Vec& x, int horizon, double tol = 1e-8,
                                         double abs_floor = 1e-7, int draws = 16,
                                         std::uint64_t seed = 0) {
  model.check_state(x);
  if (horizon < 0) throw ConfigError("noisy rank horizon must be nonnegative");
  if (draws < 1) throw ConfigError("noisy rank probe needs at least one draw");
  std::vector<int> ranks;
  ranks.reserve(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) {
    Rng rng(derive_seed(seed, 0x30, static_cast<std::uint64_t>(d)));
    Mat stacked((horizon + 1) * model.dim_output, model.dim_state);
    Mat chain = Mat::Identity(model.dim_state, model.dim_state);
    Vec cur = x;
    for (int j = 0; j <= horizon; ++j) {
      if (j > 0) {
        const Vec w = detail::draw_noise(rng, noise.process_sampler, model.dim_noise,
                                         noise.process_bound);
        chain = model.jac_f_state(cur, w) * chain;
        cur = model.step(cur, w);
      }
      stacked.middleRows(j * model.dim_output, model.dim_output) = model.jac_h(cur) * chain;
    }
    Eigen::JacobiSVD<Mat> svd(stacked);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() ? std::max(tol * sv(0), abs_floor) : abs_floor;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff) ++rank;
    ranks.push_back(rank);
  }
  return ranks;
}

enum class SecondOrderVerdict { satisfied, violated, at_global_min };

namespace detail {

// Central finite-difference Hessian of the window cost at x.
inline Mat fd_cost_hessian(const HorizonCost& cost, const Vec& x) {
  const int d = static_cast<int>(x.size());
  const double h = 1e-4 * std::max(1.0, x.norm());
  Mat hess(d, d);
  const double c0 = g_value(cost, x);
  for (int i = 0; i < d; ++i) {
    Vec xp = x;
    Vec xm = x;
    xp(i) += h;
    xm(i) -= h;
    hess(i, i) = (g_value(cost, xp) - 2.0 * c0 + g_value(cost, xm)) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp(i) += h;
      xpp(j) += h;
      xpm(i) += h;
      xpm(j) -= h;
      xmp(i) -= h;
      xmp(j) += h;
      xmm(i) -= h;
      xmm(j) -= h;
      const double v =
          (g_value(cost, xpp) - g_value(cost, xpm) - g_value(cost, xmp) + g_value(cost, xmm)) /
          (4.0 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

}  // namespace detail

// Classifies a critical point of the window cost. The underlying sufficient
// condition for well-posed window minimization asks that every critical point
// which is not a global minimum be a local maximizer; this evaluates that
// dichotomy at one point:
//   - cost value <= tol                     -> at_global_min
//   - largest FD-Hessian eigenvalue <= slack -> satisfied (local maximizer)
//   - otherwise                              -> violated
// Calling it away from a critical point (gradient norm > tol) is a contract
// violation and throws.
inline SecondOrderVerdict check_second_order_condition(const SystemModel& model,
                                                       const HorizonCost& cost, const Vec& x,
                                                       double tol = 1e-6) {
  cost.validate();
  if (cost.model != &model)
    throw ConfigError("second-order check: cost is bound to a different model");
  model.check_state(x);
  if (tol <= 0.0) throw ConfigError("second-order tolerance must be positive");
  const double grad_norm = g_gradient(cost, x).norm();
  if (grad_norm > tol)
    throw ConfigError("second-order check requires a critical point (gradient norm " +
                      std::to_string(grad_norm) + " exceeds tol)");
  if (g_value(cost, x) <= tol) return SecondOrderVerdict::at_global_min;
  const Mat hess = detail::fd_cost_hessian(cost, x);
  Eigen::SelfAdjointEigenSolver<Mat> es(hess);
  if (es.info() != Eigen::Success) throw NumericError("second-order Hessian eigensolve failed");
  const double top = es.eigenvalues().maxCoeff();
  const double slack = 1e-6 * std::max(1.0, hess.cwiseAbs().maxCoeff());
  return top <= slack ? SecondOrderVerdict::satisfied : SecondOrderVerdict::violated;
}

}  // namespace mhe

#endif  // MHE_OBSERVABILITY_HPP

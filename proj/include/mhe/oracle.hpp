#ifndef MHE_ORACLE_HPP
#define MHE_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mhe/cost.hpp"
#include "mhe/ensemble.hpp"
#include "mhe/errors.hpp"
#include "mhe/model.hpp"

namespace mhe {

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int n_cells = 0;

  double width() const { return (hi - lo) / static_cast<double>(n_cells); }
  double center(int i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
};

// Piecewise-constant density on a uniform 1D or 2D grid. Values are densities
// (mass per cell = value * cell volume). The oracle is a verification
// instrument, so the dimension cap stays at 2.
struct GridDensity {
  std::vector<GridAxis> axes;
  std::vector<double> values;  // row-major: flat = i0 * n1 + i1 in 2D
  bool normalized = false;

  int dim() const { return static_cast<int>(axes.size()); }

  int cell_count() const {
    int n = 1;
    for (const auto& a : axes) n *= a.n_cells;
    return n;
  }

  double cell_volume() const {
    double v = 1.0;
    for (const auto& a : axes) v *= a.width();
    return v;
  }

  void validate() const {
    if (axes.empty() || axes.size() > 2)
      throw ConfigError("grid density supports 1 or 2 dimensions");
    for (const auto& a : axes)
      if (a.n_cells < 1 || !(a.hi > a.lo))
        throw ConfigError("grid axis requires hi > lo and at least one cell");
    if (static_cast<int>(values.size()) != cell_count())
      throw ConfigError("grid density value count does not match the grid");
    for (double v : values)
      if (v < 0.0) throw ConfigError("grid density values must be nonnegative");
  }

  Vec center(int flat) const {
    Vec c(dim());
    if (dim() == 1) {
      c(0) = axes[0].center(flat);
    } else {
      const int n1 = axes[1].n_cells;
      c(0) = axes[0].center(flat / n1);
      c(1) = axes[1].center(flat % n1);
    }
    return c;
  }

  double total_mass() const {
    double m = 0.0;
    for (double v : values) m += v;
    return m * cell_volume();
  }

  void normalize() {
    validate();
    const double m = total_mass();
    if (m <= 0.0) throw NumericError("cannot normalize a density with zero total mass");
    for (double& v : values) v /= m;
    normalized = true;
  }
};

inline GridDensity uniform_grid_density(std::vector<GridAxis> axes) {
  GridDensity g;
  g.axes = std::move(axes);
  g.values.assign(static_cast<std::size_t>(g.cell_count()), 1.0);
  g.normalize();
  return g;
}

// One exact filtering step on the grid:
//   1. push the density through f0 by forward scatter (each cell's mass moves
//      to f0(center) and splits multilinearly over the target cell corners),
//   2. raise the pushed density to the tempering power s,
//   3. multiply by exp(-eta * s * G(cell center)),
//   4. renormalize.
// Forward scatter conserves mass without needing the inverse dynamics; mass
// landing outside the grid is tracked and trips an error past escape_tol.
inline GridDensity grid_filter_step(const GridDensity& density, const SystemModel& model,
                                    const HorizonCost& cost, double eta, double s,
                                    double escape_tol = 0.01) {
  density.validate();
  if (!density.normalized) throw ConfigError("grid filter requires a normalized input density");
  if (model.dim_state != density.dim())
    throw ConfigError("grid dimension does not match the model state dimension");
  if (!(s > 0.0 && s <= 1.0)) throw ConfigError("tempering power must lie in (0, 1]");
  if (eta <= 0.0) throw ConfigError("grid filter eta must be positive");
  cost.validate();

  const int d = density.dim();
  const int cells = density.cell_count();
  const double vol = density.cell_volume();
  std::vector<double> mass(static_cast<std::size_t>(cells), 0.0);
  double lost = 0.0;

  for (int c = 0; c < cells; ++c) {
    const double m = density.values[static_cast<std::size_t>(c)] * vol;
    if (m == 0.0) continue;
    const Vec target = model.f0(density.center(c));
    // Fractional cell coordinates of the target point.
    int base[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      const double u = (target(a) - density.axes[a].lo) / density.axes[a].width() - 0.5;
      const double fl = std::floor(u);
      base[a] = static_cast<int>(fl);
      frac[a] = u - fl;
    }
    const int corners = 1 << d;
    for (int corner = 0; corner < corners; ++corner) {
      double w = 1.0;
      int idx[2] = {0, 0};
      bool inside = true;
      for (int a = 0; a < d; ++a) {
        const int off = (corner >> a) & 1;
        idx[a] = base[a] + off;
        w *= off ? frac[a] : (1.0 - frac[a]);
        if (idx[a] < 0 || idx[a] >= density.axes[a].n_cells) inside = false;
      }
      if (w == 0.0) continue;
      if (!inside) {
        lost += m * w;
        continue;
      }
      const int flat = d == 1 ? idx[0] : idx[0] * density.axes[1].n_cells + idx[1];
      mass[static_cast<std::size_t>(flat)] += m * w;
    }
  }

  if (lost > escape_tol)
    throw GridEscapeError("pushforward lost " + std::to_string(lost * 100.0) +
                              "% of mass off the grid",
                          lost);

  GridDensity out;
  out.axes = density.axes;
  out.values.resize(static_cast<std::size_t>(cells));
  for (int c = 0; c < cells; ++c) {
    const double pushed = mass[static_cast<std::size_t>(c)] / vol;
    const double tempered = pushed > 0.0 ? std::pow(pushed, s) : 0.0;
    const double fit = std::exp(-eta * s * g_value(cost, density.center(c)));
    out.values[static_cast<std::size_t>(c)] = tempered * fit;
  }
  out.normalize();
  return out;
}

// Divergence evaluations carry an explicit support-mismatch flag instead of
// throwing: a mismatch is a meaningful verdict (infinite divergence).
struct DivergenceResult {
  double value = 0.0;
  bool support_mismatch = false;
};

namespace detail {

inline void require_same_grid(const GridDensity& p, const GridDensity& q) {
  p.validate();
  q.validate();
  if (!p.normalized || !q.normalized)
    throw ConfigError("divergence requires normalized densities");
  if (p.axes.size() != q.axes.size())
    throw ConfigError("divergence requires identical grids");
  for (std::size_t a = 0; a < p.axes.size(); ++a)
    if (p.axes[a].lo != q.axes[a].lo || p.axes[a].hi != q.axes[a].hi ||
        p.axes[a].n_cells != q.axes[a].n_cells)
      throw ConfigError("divergence requires identical grids");
}

}  // namespace detail

// sup over cells of |log(p/q)| on the common support; flagged infinite when
// the supports differ.
inline DivergenceResult max_divergence(const GridDensity& p, const GridDensity& q) {
  detail::require_same_grid(p, q);
  DivergenceResult r;
  for (std::size_t c = 0; c < p.values.size(); ++c) {
    const double pv = p.values[c];
    const double qv = q.values[c];
    if ((pv > 0.0) != (qv > 0.0)) {
      r.support_mismatch = true;
      r.value = std::numeric_limits<double>::infinity();
      return r;
    }
    if (pv > 0.0) r.value = std::max(r.value, std::abs(std::log(pv / qv)));
  }
  return r;
}

// sum over cells of p * log(p/q) * volume, with 0 log 0 = 0; flagged infinite
// when q vanishes somewhere p does not.
inline DivergenceResult kl_divergence(const GridDensity& p, const GridDensity& q) {
  detail::require_same_grid(p, q);
  DivergenceResult r;
  const double vol = p.cell_volume();
  for (std::size_t c = 0; c < p.values.size(); ++c) {
    const double pv = p.values[c];
    if (pv == 0.0) continue;
    const double qv = q.values[c];
    if (qv == 0.0) {
      r.support_mismatch = true;
      r.value = std::numeric_limits<double>::infinity();
      return r;
    }
    r.value += pv * std::log(pv / qv) * vol;
  }
  return r;
}

// Exact minimum-cost assignment on a square cost matrix (shortest augmenting
// path with potentials, cubic time). Returns column j matched to each row i.
inline std::vector<int> min_cost_assignment(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n || n < 1) throw ConfigError("assignment requires a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (match[static_cast<std::size_t>(j)] > 0)
      assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return assignment;
}

// Exact 2-Wasserstein distance between equally sized, uniformly weighted
// ensembles: sorted pairing in 1D, optimal assignment otherwise.
inline double empirical_w2(const Ensemble& a, const Ensemble& b) {
  a.require_nonempty();
  b.require_nonempty();
  if (a.size() != b.size())
    throw ConfigError("empirical W2 requires equal sample counts (resample first)");
  if (a.dim() != b.dim()) throw ConfigError("empirical W2 requires equal state dimensions");
  const int n = a.size();
  double total_sq = 0.0;
  if (a.dim() == 1) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    std::vector<double> ys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      xs[static_cast<std::size_t>(i)] = a.points[static_cast<std::size_t>(i)](0);
      ys[static_cast<std::size_t>(i)] = b.points[static_cast<std::size_t>(i)](0);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    for (int i = 0; i < n; ++i) {
      const double d = xs[static_cast<std::size_t>(i)] - ys[static_cast<std::size_t>(i)];
      total_sq += d * d;
    }
  } else {
    Mat cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        cost(i, j) =
            (a.points[static_cast<std::size_t>(i)] - b.points[static_cast<std::size_t>(j)])
                .squaredNorm();
    const std::vector<int> assignment = min_cost_assignment(cost);
    for (int i = 0; i < n; ++i) total_sq += cost(i, assignment[static_cast<std::size_t>(i)]);
  }
  return std::sqrt(total_sq / static_cast<double>(n));
}

// Differential entropy functional sum rho log rho * volume (larger means more
// concentrated; uniform over volume V gives -log V).
inline double entropy(const GridDensity& p) {
  p.validate();
  if (!p.normalized) throw ConfigError("entropy requires a normalized density");
  const double vol = p.cell_volume();
  double acc = 0.0;
  for (double v : p.values)
    if (v > 0.0) acc += v * std::log(v) * vol;
  return acc;
}

// Per-coordinate root-mean-square error between two equally long state
// sequences.
inline Vec rmse(const std::vector<Vec>& estimates, const std::vector<Vec>& truth) {
  if (estimates.size() != truth.size() || estimates.empty())
    throw ConfigError("RMSE requires equally long, nonempty sequences");
  const int d = static_cast<int>(estimates.front().size());
  Vec acc = Vec::Zero(d);
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (estimates[k].size() != d || truth[k].size() != d)
      throw ConfigError("RMSE sequence dimension mismatch");
    const Vec diff = estimates[k] - truth[k];
    acc += diff.cwiseProduct(diff);
  }
  return (acc / static_cast<double>(estimates.size())).cwiseSqrt();
}

// Bins weighted points onto a grid (points clamp to the boundary cells) and
// normalizes; used to compare particle clouds against grid densities.
inline GridDensity particle_histogram(const std::vector<Vec>& points,
                                      const std::vector<double>& weights,
                                      std::vector<GridAxis> axes) {
  if (points.empty() || points.size() != weights.size())
    throw ConfigError("histogram requires matching nonempty points and weights");
  GridDensity g;
  g.axes = std::move(axes);
  g.values.assign(static_cast<std::size_t>(g.cell_count()), 0.0);
  g.validate();
  const int d = g.dim();
  for (const Vec& p : points)
    if (p.size() != d) throw ConfigError("histogram point dimension mismatch");
  for (std::size_t i = 0; i < points.size(); ++i) {
    int idx[2] = {0, 0};
    for (int a = 0; a < d; ++a) {
      const int raw =
          static_cast<int>(std::floor((points[i](a) - g.axes[a].lo) / g.axes[a].width()));
      idx[a] = std::clamp(raw, 0, g.axes[a].n_cells - 1);
    }
    const int flat = d == 1 ? idx[0] : idx[0] * g.axes[1].n_cells + idx[1];
    g.values[static_cast<std::size_t>(flat)] += weights[i];
  }
  g.normalize();
  return g;
}

// Total variation distance between densities on the same grid: half the L1 mass
// difference; lies in [0, 1].
inline double total_variation(const GridDensity& p, const GridDensity& q) {
  detail::require_same_grid(p, q);
  const double vol = p.cell_volume();
  double acc = 0.0;
  for (std::size_t c = 0; c < p.values.size(); ++c)
    acc += std::abs(p.values[c] - q.values[c]);
  return 0.5 * acc * vol;
}

}  // namespace mhe

#endif  // MHE_ORACLE_HPP

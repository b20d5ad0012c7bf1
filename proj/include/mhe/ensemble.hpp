#ifndef MHE_ENSEMBLE_HPP
#define MHE_ENSEMBLE_HPP

#include <cstdint>
#include <vector>

#include "mhe/errors.hpp"
#include "mhe/model.hpp"
#include "mhe/rng.hpp"

namespace mhe {

// An unweighted collection of state samples. Estimators treat each point as
// one sample of the state posterior; the point estimate is the mean.
struct Ensemble {
  std::vector<Vec> points;

  int size() const { return static_cast<int>(points.size()); }

  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }

  void require_nonempty() const {
    if (points.empty()) throw ConfigError("ensemble must contain at least one point");
  }

  Vec mean() const {
    require_nonempty();
    Vec acc = Vec::Zero(points.front().size());
    for (const Vec& p : points) acc += p;
    return acc / static_cast<double>(points.size());
  }

  // Euclidean diagonal of the axis-aligned bounding box. Used as the default
  // support diameter in privacy budget arithmetic.
  double diameter() const {
    require_nonempty();
    Vec lo = points.front();
    Vec hi = points.front();
    for (const Vec& p : points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
  }
};

// n independent draws, uniform per coordinate over [lo, hi].
inline Ensemble sample_uniform_box(const Vec& lo, const Vec& hi, int n, std::uint64_t seed) {
  if (lo.size() != hi.size()) throw ConfigError("prior box bounds must share a dimension");
  if (n < 1) throw ConfigError("ensemble size must be at least 1");
  for (int i = 0; i < lo.size(); ++i)
    if (lo(i) > hi(i)) throw ConfigError("prior box has lo > hi in some coordinate");
  Rng rng(derive_seed(seed, 0x05));
  Ensemble e;
  e.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vec x(lo.size());
    for (int j = 0; j < lo.size(); ++j) x(j) = rng.uniform(lo(j), hi(j));
    e.points.push_back(std::move(x));
  }
  return e;
}

}  // namespace mhe

#endif  // MHE_ENSEMBLE_HPP

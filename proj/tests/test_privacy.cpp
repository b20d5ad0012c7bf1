#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "mhe/privacy.hpp"
#include "mhe/systems.hpp"

using namespace mhe;

namespace {

Vec v1(double a) {
  Vec x(1);
  x << a;
  return x;
}

PrivacyConstants unit_constants(double l, double eta, double c_f1, double diam) {
  PrivacyConstants c;
  c.l = l;
  c.eta = eta;
  c.c_f1 = c_f1;
  c.diam_k0 = diam;
  return c;
}

PrivacySchedule constant_schedule(double epsilon, double delta, double s, int horizon,
                                  const PrivacyConstants& constants) {
  PrivacySchedule sched;
  sched.epsilon = epsilon;
  sched.delta = delta;
  sched.horizon_T = horizon;
  sched.constants = constants;
  sched.s.assign(static_cast<std::size_t>(horizon), s);
  return sched;
}

}  // namespace

TEST_CASE("pointwise tempering bound evaluation") {
  // eps_T = 1, c = 1, diam = 1, eta = 0.5, l = 2, delta = 0.1, identity
  // modulus: bound = 1 / (1 + (0.1 + 0.1)) = 1/1.2.
  CHECK(w2_pointwise_s_bound(1.0, 0.1, 2.0, 0.5, 1.0, 1.0, 7) ==
        Catch::Approx(1.0 / 1.2).margin(1e-12));
  // No adjacency gap: the bound is exactly 1.
  CHECK(w2_pointwise_s_bound(1.0, 0.0, 2.0, 0.5, 1.0, 1.0, 7) == 1.0);
  // A vanishing budget forces the level toward zero.
  CHECK(w2_pointwise_s_bound(1e-12, 0.1, 2.0, 0.5, 1.0, 1.0, 7) < 1e-10);
  // A custom modulus replaces the identity.
  const double doubled =
      w2_pointwise_s_bound(1.0, 0.1, 2.0, 0.5, 1.0, 1.0, 7, [](double d) { return 2.0 * d; });
  CHECK(doubled == Catch::Approx(1.0 / 1.3).margin(1e-12));
  CHECK_THROWS_AS(w2_pointwise_s_bound(0.0, 0.1, 2.0, 0.5, 1.0, 1.0, 7), ConfigError);
  CHECK_THROWS_AS(w2_pointwise_s_bound(1.0, 0.1, 0.0, 0.5, 1.0, 1.0, 7), ConfigError);
}

TEST_CASE("sample-channel horizon budget boundary at one third") {
  // c = 1, T = 10, eps = 1, l = 2, delta = 0.1, diam = 1: feasible exactly
  // when s/(1-s) <= 1/2, i.e. s <= 1/3.
  const PrivacyConstants c = unit_constants(2.0, 0.1, 1.0, 1.0);
  const FeasibilityVerdict at = w2_horizon_feasible(constant_schedule(1.0, 0.1, 1.0 / 3.0, 10, c));
  CHECK(at.feasible);
  CHECK(at.lhs == Catch::Approx(5.0).margin(1e-9));
  CHECK(at.rhs == Catch::Approx(5.0).margin(1e-12));
  const FeasibilityVerdict below =
      w2_horizon_feasible(constant_schedule(1.0, 0.1, 1.0 / 3.0 - 1e-6, 10, c));
  CHECK(below.feasible);
  CHECK(below.slack > 0.0);
  const FeasibilityVerdict above =
      w2_horizon_feasible(constant_schedule(1.0, 0.1, 1.0 / 3.0 + 1e-6, 10, c));
  CHECK_FALSE(above.feasible);

  const double s_star = max_s_schedule(ScheduleKind::w2_horizon, 1.0, 0.1, c, 10);
  CHECK(s_star == Catch::Approx(1.0 / 3.0).margin(1e-9));
}

TEST_CASE("zero adjacency radius is trivially feasible") {
  const PrivacyConstants c = unit_constants(2.0, 0.1, 1.0, 1.0);
  const FeasibilityVerdict v = w2_horizon_feasible(constant_schedule(1.0, 0.0, 0.999, 10, c));
  CHECK(v.feasible);
  CHECK(v.trivial);
  CHECK(std::isinf(v.slack));
  CHECK(max_s_schedule(ScheduleKind::w2_horizon, 1.0, 0.0, c, 10) == 1.0);
  CHECK(max_s_schedule(ScheduleKind::kl_pointwise, 1.0, 0.0, c, 10) == 1.0);
  CHECK(max_s_schedule(ScheduleKind::kl_horizon, 1.0, 0.0, c, 10) == 1.0);
}

TEST_CASE("full tempering level with a positive radius is infeasible") {
  const PrivacyConstants c = unit_constants(2.0, 0.1, 1.0, 1.0);
  PrivacySchedule sched = constant_schedule(1.0, 0.1, 0.2, 10, c);
  sched.s[4] = 1.0;
  const FeasibilityVerdict v = w2_horizon_feasible(sched);
  CHECK_FALSE(v.feasible);
  CHECK(std::isinf(v.lhs));
}

TEST_CASE("tempered-filter final-marginal budget boundary") {
  // eta = 0.1, l = 2, delta = 0.1, diam = 1, c = 1, T = 3, eps_T = 0.04:
  // RHS = 1 and the constant-s boundary solves s + s^2 + s^3 = 1.
  const PrivacyConstants c = unit_constants(2.0, 0.1, 1.0, 1.0);
  const double boundary = 0.5436890126920763;
  const FeasibilityVerdict v = kl_pointwise_feasible(constant_schedule(0.04, 0.1, boundary, 3, c));
  CHECK(v.rhs == Catch::Approx(1.0).margin(1e-12));
  CHECK(v.lhs == Catch::Approx(1.0).margin(1e-9));
  const double s_star = max_s_schedule(ScheduleKind::kl_pointwise, 0.04, 0.1, c, 3);
  CHECK(s_star == Catch::Approx(boundary).margin(1e-9));
}

TEST_CASE("tempered-filter whole-horizon budget boundary") {
  // Same constants, T = 2, eps = 0.04: boundary solves 2s + s^2 = 1.
  const PrivacyConstants c = unit_constants(2.0, 0.1, 1.0, 1.0);
  const double boundary = std::sqrt(2.0) - 1.0;
  const FeasibilityVerdict v = kl_horizon_feasible(constant_schedule(0.04, 0.1, boundary, 2, c));
  CHECK(v.rhs == Catch::Approx(1.0).margin(1e-12));
  CHECK(v.lhs == Catch::Approx(1.0).margin(1e-9));
  const double s_star = max_s_schedule(ScheduleKind::kl_horizon, 0.04, 0.1, c, 2);
  CHECK(s_star == Catch::Approx(boundary).margin(1e-9));

  // T = 1 reduces the double sum to the single suffix product.
  const FeasibilityVerdict h1 = kl_horizon_feasible(constant_schedule(0.04, 0.1, 0.3, 1, c));
  const FeasibilityVerdict p1 = kl_pointwise_feasible(constant_schedule(0.04, 0.1, 0.3, 1, c));
  CHECK(h1.lhs == Catch::Approx(p1.lhs).margin(1e-15));
}

TEST_CASE("alpha floors enter the sensitivity coefficient") {
  PrivacyConstants c = unit_constants(2.0, 0.1, 1.0, 1.0);
  const FeasibilityVerdict plain = kl_pointwise_feasible(constant_schedule(0.04, 0.1, 0.3, 3, c));
  c.alpha = {0.0, 0.3, 0.0, 0.0};
  const FeasibilityVerdict with_floor =
      kl_pointwise_feasible(constant_schedule(0.04, 0.1, 0.3, 3, c));
  // coefficient rises from 0.2 to 0.3 + 0.2 = 0.5, shrinking the budget.
  CHECK(plain.rhs == Catch::Approx(1.0).margin(1e-12));
  CHECK(with_floor.rhs == Catch::Approx(0.04 / (2.0 * 0.1 * 0.5)).margin(1e-12));
  CHECK(with_floor.rhs < plain.rhs);
}

TEST_CASE("budget monotonicity in epsilon, radius, and diameter") {
  const double epsilons[5] = {0.25, 0.5, 1.0, 2.0, 4.0};
  const double deltas[5] = {0.01, 0.05, 0.1, 0.2, 0.4};
  const double diams[5] = {0.5, 1.0, 2.0, 4.0, 8.0};
  for (ScheduleKind kind :
       {ScheduleKind::w2_horizon, ScheduleKind::kl_pointwise, ScheduleKind::kl_horizon}) {
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 5; ++b) {
        for (int g = 0; g < 5; ++g) {
          const PrivacyConstants c = unit_constants(2.0, 0.1, 0.9, diams[g]);
          const double s = max_s_schedule(kind, epsilons[a], deltas[b], c, 4);
          CHECK(s > 0.0);
          CHECK(s <= 1.0);
          if (a > 0) {
            const double prev =
                max_s_schedule(kind, epsilons[a - 1], deltas[b],
                               unit_constants(2.0, 0.1, 0.9, diams[g]), 4);
            CHECK(s >= prev - 1e-9);
          }
          if (b > 0) {
            const double prev =
                max_s_schedule(kind, epsilons[a], deltas[b - 1],
                               unit_constants(2.0, 0.1, 0.9, diams[g]), 4);
            CHECK(s <= prev + 1e-9);
          }
          if (g > 0) {
            const double prev =
                max_s_schedule(kind, epsilons[a], deltas[b],
                               unit_constants(2.0, 0.1, 0.9, diams[g - 1]), 4);
            CHECK(s <= prev + 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("maximal constant schedule substitutes back with nonnegative slack") {
  const PrivacyConstants c = unit_constants(3.0, 0.2, 0.95, 2.0);
  for (ScheduleKind kind :
       {ScheduleKind::w2_horizon, ScheduleKind::kl_pointwise, ScheduleKind::kl_horizon}) {
    const double s = max_s_schedule(kind, 0.5, 0.05, c, 6);
    const PrivacySchedule sched = constant_schedule(0.5, 0.05, s, 6, c);
    FeasibilityVerdict v;
    switch (kind) {
      case ScheduleKind::w2_horizon: v = w2_horizon_feasible(sched); break;
      case ScheduleKind::kl_pointwise: v = kl_pointwise_feasible(sched); break;
      case ScheduleKind::kl_horizon: v = kl_horizon_feasible(sched); break;
    }
    CHECK(v.feasible);
    CHECK(v.slack >= -1e-9);
  }
}

TEST_CASE("schedule kind names round-trip") {
  for (ScheduleKind kind :
       {ScheduleKind::w2_horizon, ScheduleKind::kl_pointwise, ScheduleKind::kl_horizon})
    CHECK(schedule_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(schedule_kind_from_string("bogus"), ConfigError);
}

TEST_CASE("schedule validation") {
  const PrivacyConstants c = unit_constants(2.0, 0.1, 1.0, 1.0);
  PrivacySchedule sched = constant_schedule(1.0, 0.1, 0.5, 3, c);
  CHECK_NOTHROW(sched.validate());
  sched.epsilon = 0.0;
  CHECK_THROWS_AS(sched.validate(), ConfigError);
  sched = constant_schedule(1.0, -0.1, 0.5, 3, c);
  CHECK_THROWS_AS(sched.validate(), ConfigError);
  sched = constant_schedule(1.0, 0.1, 0.5, 3, c);
  sched.s.pop_back();
  CHECK_THROWS_AS(sched.validate(), ConfigError);
  sched = constant_schedule(1.0, 0.1, 1.5, 3, c);
  CHECK_THROWS_AS(sched.validate(), ConfigError);
  sched = constant_schedule(1.0, 0.1, 0.5, 3, unit_constants(0.0, 0.1, 1.0, 1.0));
  CHECK_THROWS_AS(sched.validate(), ConfigError);
  CHECK_THROWS_AS(constant_schedule(1.0, 0.1, 0.5, 3, c).s_at(4), ConfigError);
}

TEST_CASE("grid audit with identical measurement records reports zero divergence") {
  const SystemModel m = make_linear1d(0.9);
  NoiseSpec noise;
  noise.process_bound = 0.01;
  noise.measurement_bound = 0.01;
  const Trajectory traj = simulate(m, noise, v1(0.5), 8, 19);
  GridDensity prior = uniform_grid_density({GridAxis{-2.0, 2.0, 40}});
  const PrivacyConstants c = unit_constants(2.0, 0.1, 0.9, 4.0);
  const PrivacySchedule sched = constant_schedule(0.5, 0.1, 0.5, 4, c);
  const DpGridReport report = dp_verify_on_grid(m, prior, traj.outputs, traj.outputs, sched, 3);
  REQUIRE(report.dmax_trace.size() == 4);
  for (double d : report.dmax_trace) CHECK(d == 0.0);
  CHECK(report.final_dmax == 0.0);
  CHECK_FALSE(report.support_mismatch);
}

TEST_CASE("grid audit rejects sequences that are not adjacent") {
  const SystemModel m = make_linear1d(0.9);
  const Trajectory traj = simulate(m, NoiseSpec{}, v1(0.5), 8, 19);
  std::vector<Vec> far = traj.outputs;
  far[3](0) += 0.5;  // exceeds delta = 0.1
  GridDensity prior = uniform_grid_density({GridAxis{-2.0, 2.0, 40}});
  const PrivacyConstants c = unit_constants(2.0, 0.1, 0.9, 4.0);
  const PrivacySchedule sched = constant_schedule(0.5, 0.1, 0.5, 4, c);
  CHECK_THROWS_AS(dp_verify_on_grid(m, prior, traj.outputs, far, sched, 3), ConfigError);
  CHECK_THROWS_AS(dp_verify_on_grid(m, prior, traj.outputs, traj.outputs, sched, 0), ConfigError);
  std::vector<Vec> short_record(traj.outputs.begin(), traj.outputs.begin() + 5);
  CHECK_THROWS_AS(dp_verify_on_grid(m, prior, short_record, short_record, sched, 3), ConfigError);
}

TEST_CASE("grid audit confirms the final-marginal budget for a feasible schedule") {
  const SystemModel m = make_linear1d(0.95);
  NoiseSpec noise;
  noise.process_bound = 0.01;
  noise.measurement_bound = 0.01;
  const int horizon = 5;
  const int window = 3;
  const Trajectory traj = simulate(m, noise, v1(1.0), horizon + window + 1, 4);
  const double delta = 0.01;
  std::vector<Vec> shifted = traj.outputs;
  for (Vec& y : shifted) y(0) += delta;

  GridDensity prior = uniform_grid_density({GridAxis{-3.0, 3.0, 120}});
  const double chain_l = make_window_cost(m, traj.outputs, 0, window).l_smooth;
  PrivacyConstants c = unit_constants(chain_l, 0.05, 0.95, 6.0);
  const double eps_t = 0.04;
  const double s_star = max_s_schedule(ScheduleKind::kl_pointwise, eps_t, delta, c, horizon);
  REQUIRE(s_star < 1.0);
  PrivacySchedule sched = constant_schedule(eps_t, delta, s_star, horizon, c);
  const DpGridReport report = dp_verify_on_grid(m, prior, traj.outputs, shifted, sched, window);
  CHECK_FALSE(report.support_mismatch);
  CHECK(report.epsilon_bound <= eps_t * (1.0 + 1e-9));
  CHECK(report.final_dmax <= eps_t);

  // Without tempering the divergence exceeds the tempered run's.
  PrivacySchedule full = constant_schedule(eps_t, delta, 1.0, horizon, c);
  const DpGridReport raw = dp_verify_on_grid(m, prior, traj.outputs, shifted, full, window);
  CHECK(raw.final_dmax >= report.final_dmax);
}

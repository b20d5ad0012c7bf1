#ifndef MHE_HARNESS_HPP
#define MHE_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mhe/config.hpp"
#include "mhe/csv.hpp"
#include "mhe/ensemble.hpp"
#include "mhe/errors.hpp"
#include "mhe/kl.hpp"
#include "mhe/model.hpp"
#include "mhe/observability.hpp"
#include "mhe/oracle.hpp"
#include "mhe/privacy.hpp"
#include "mhe/svg.hpp"
#include "mhe/systems.hpp"
#include "mhe/w2.hpp"

namespace mhe {

// Fully resolved experiment description. Every run record embeds the resolved
// seed so outputs are reproducible from the config file plus one integer.
struct ExperimentConfig {
  // [system]
  std::string system_name = "benchmark2d";
  double tau = 0.1;
  double sine_a = 2.0;
  double sine_band = 0.01;
  double gain = 0.9;
  double lip_dynamics_state = 0.0;  // 0 keeps the constructor default
  double lip_dynamics_noise = 0.0;
  double lip_output = 0.0;

  // [noise]
  double process_bound = 0.01;
  double measurement_bound = 0.01;

  // [init]
  std::vector<double> truth_x0;
  std::vector<double> prior_lo;
  std::vector<double> prior_hi;
  int count = 30;

  // [estimator]
  std::string method = "w2";  // w2 | kl | both
  double eta = 0.03;
  int n_window = 10;
  int horizon_T = 100;

  // [w2]
  double inner_tol = 1e-10;
  int inner_max_iters = 200;
  std::string w2_mode = "permissive";
  double alpha = 0.0;
  double declared_l = 0.0;
  double declared_L = 0.0;
  double declared_lw = 0.0;

  // [kl]
  double resample_threshold = 0.5;
  double jitter_bandwidth = 0.0;
  double propagation_noise = 0.0;

  // [dp]
  bool dp_enabled = false;
  double dp_epsilon = 1.0;
  double dp_delta = 0.0;
  std::string dp_kind = "w2_horizon";
  double dp_s = 0.0;     // explicit constant level; 0 means derive via max_s_schedule
  double dp_c_f1 = 0.0;  // 0 falls back to the model's declared constant
  double dp_l = 0.0;     // 0 falls back to declared_l, then the cost chain default
  double dp_diam = 0.0;  // 0 falls back to the prior ensemble diameter

  // [tradeoff]
  std::vector<double> tradeoff_epsilons{0.5, 1.0, 2.0, 5.0};

  // [observability]
  std::vector<double> obs_lo;
  std::vector<double> obs_hi;
  int obs_points = 5;
  int obs_t_max = 3;
  double obs_tol = 1e-8;
  double obs_abs_floor = 1e-7;

  static ExperimentConfig load(const ConfigStore& store) {
    ExperimentConfig c;
    c.system_name = store.get_string("system", "name", c.system_name);
    c.tau = store.get_double("system", "tau", c.tau);
    c.sine_a = store.get_double("system", "a", c.sine_a);
    c.sine_band = store.get_double("system", "band", c.sine_band);
    c.gain = store.get_double("system", "gain", c.gain);
    c.lip_dynamics_state = store.get_double("system", "lip_dynamics_state", 0.0);
    c.lip_dynamics_noise = store.get_double("system", "lip_dynamics_noise", 0.0);
    c.lip_output = store.get_double("system", "lip_output", 0.0);

    c.process_bound = store.get_double("noise", "process_bound", c.process_bound);
    c.measurement_bound = store.get_double("noise", "measurement_bound", c.measurement_bound);

    c.truth_x0 = store.get_vector("init", "truth", c.truth_x0);
    c.prior_lo = store.get_vector("init", "prior_lo", c.prior_lo);
    c.prior_hi = store.get_vector("init", "prior_hi", c.prior_hi);
    c.count = store.get_int("init", "count", c.count);

    c.method = store.get_string("estimator", "method", c.method);
    c.eta = store.get_double("estimator", "eta", c.eta);
    c.n_window = store.get_int("estimator", "window", c.n_window);
    c.horizon_T = store.get_int("estimator", "horizon", c.horizon_T);

    c.inner_tol = store.get_double("w2", "inner_tol", c.inner_tol);
    c.inner_max_iters = store.get_int("w2", "inner_max_iters", c.inner_max_iters);
    c.w2_mode = store.get_string("w2", "mode", c.w2_mode);
    c.alpha = store.get_double("w2", "alpha", c.alpha);
    c.declared_l = store.get_double("w2", "l", c.declared_l);
    c.declared_L = store.get_double("w2", "L", c.declared_L);
    c.declared_lw = store.get_double("w2", "l_w", c.declared_lw);

    c.resample_threshold = store.get_double("kl", "resample_threshold", c.resample_threshold);
    c.jitter_bandwidth = store.get_double("kl", "jitter_bandwidth", c.jitter_bandwidth);
    c.propagation_noise = store.get_double("kl", "propagation_noise", c.propagation_noise);

    c.dp_enabled = store.get_bool("dp", "enabled", c.dp_enabled);
    c.dp_epsilon = store.get_double("dp", "epsilon", c.dp_epsilon);
    c.dp_delta = store.get_double("dp", "delta", c.dp_delta);
    c.dp_kind = store.get_string("dp", "kind", c.dp_kind);
    c.dp_s = store.get_double("dp", "s", c.dp_s);
    c.dp_c_f1 = store.get_double("dp", "c_f1", c.dp_c_f1);
    c.dp_l = store.get_double("dp", "l", c.dp_l);
    c.dp_diam = store.get_double("dp", "diam", c.dp_diam);

    c.tradeoff_epsilons = store.get_vector("tradeoff", "epsilons", c.tradeoff_epsilons);

    c.obs_lo = store.get_vector("observability", "lo", c.obs_lo);
    c.obs_hi = store.get_vector("observability", "hi", c.obs_hi);
    c.obs_points = store.get_int("observability", "points", c.obs_points);
    c.obs_t_max = store.get_int("observability", "t_max", c.obs_t_max);
    c.obs_tol = store.get_double("observability", "tol", c.obs_tol);
    c.obs_abs_floor = store.get_double("observability", "abs_floor", c.obs_abs_floor);

    store.require_all_consumed();

    if (c.method != "w2" && c.method != "kl" && c.method != "both")
      throw ConfigError("estimator method must be w2, kl, or both");
    if (c.w2_mode != "permissive" && c.w2_mode != "certified")
      throw ConfigError("w2 mode must be permissive or certified");
    return c;
  }
};

namespace detail {

inline Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
  return out;
}

inline std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

inline double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline SystemModel make_model(const ExperimentConfig& c) {
  SystemModel m;
  if (c.system_name == "benchmark2d")
    m = make_benchmark2d(c.tau);
  else if (c.system_name == "sine1d")
    m = make_sine1d(c.sine_a, c.sine_band);
  else if (c.system_name == "linear1d")
    m = make_linear1d(c.gain);
  else
    throw ConfigError("unknown system '" + c.system_name +
                      "' (known: benchmark2d, sine1d, linear1d)");
  if (c.lip_dynamics_state > 0.0) m.lip_dynamics_state = c.lip_dynamics_state;
  if (c.lip_dynamics_noise > 0.0) m.lip_dynamics_noise = c.lip_dynamics_noise;
  if (c.lip_output > 0.0) m.lip_output = c.lip_output;
  return m;
}

inline NoiseSpec make_noise(const ExperimentConfig& c) {
  NoiseSpec n;
  n.process_bound = c.process_bound;
  n.measurement_bound = c.measurement_bound;
  return n;
}

inline Vec default_truth_x0(const ExperimentConfig& c, const SystemModel& model) {
  if (!c.truth_x0.empty()) {
    const Vec x0 = detail::to_vec(c.truth_x0);
    model.check_state(x0);
    return x0;
  }
  Vec x0 = Vec::Zero(model.dim_state);
  x0(0) = 1.0;
  return x0;
}

inline Ensemble make_prior(const ExperimentConfig& c, const SystemModel& model,
                           std::uint64_t seed) {
  Vec lo, hi;
  if (!c.prior_lo.empty() || !c.prior_hi.empty()) {
    lo = detail::to_vec(c.prior_lo);
    hi = detail::to_vec(c.prior_hi);
    if (lo.size() != model.dim_state || hi.size() != model.dim_state)
      throw ConfigError("prior box dimension does not match the system state");
  } else {
    lo = Vec::Constant(model.dim_state, -1.0);
    hi = Vec::Constant(model.dim_state, 1.0);
  }
  return sample_uniform_box(lo, hi, c.count, derive_seed(seed, 0x02));
}

// Window-cost smoothness default from declared model constants when nothing
// sharper was configured: 2 * sum_j (c_h * c_f1^j)^2 over the window.
inline double chain_smoothness_default(const SystemModel& model, int n_window) {
  double chain = 0.0;
  double factor = 1.0;
  for (int j = 1; j <= n_window; ++j) {
    factor *= model.lip_dynamics_state;
    const double path = model.lip_output * factor;
    chain += path * path;
  }
  return 2.0 * chain;
}

// Resolved privacy request: the schedule fed to the estimators plus the
// feasibility verdict used for reporting and --strict enforcement.
struct DpResolution {
  bool enabled = false;
  double s_star = 1.0;
  bool feasible = true;
  bool derived = false;  // true when s came from max_s_schedule
  FeasibilityVerdict verdict;
  PrivacyConstants constants;
  std::optional<DpSchedule> schedule;
};

inline DpResolution resolve_dp(const ExperimentConfig& c, const SystemModel& model,
                               double prior_diam, std::uint64_t seed) {
  DpResolution r;
  if (!c.dp_enabled) return r;
  r.enabled = true;
  r.constants.eta = c.eta;
  r.constants.c_f1 = c.dp_c_f1 > 0.0 ? c.dp_c_f1 : model.lip_dynamics_state;
  r.constants.l = c.dp_l > 0.0
                      ? c.dp_l
                      : (c.declared_l > 0.0 ? c.declared_l
                                            : chain_smoothness_default(model, c.n_window));
  r.constants.diam_k0 = c.dp_diam > 0.0 ? c.dp_diam : prior_diam;
  const ScheduleKind kind = schedule_kind_from_string(c.dp_kind);

  if (c.dp_s > 0.0) {
    r.s_star = c.dp_s;
  } else {
    r.s_star = max_s_schedule(kind, c.dp_epsilon, c.dp_delta, r.constants, c.horizon_T);
    r.derived = true;
  }

  PrivacySchedule sched;
  sched.epsilon = c.dp_epsilon;
  sched.delta = c.dp_delta;
  sched.horizon_T = c.horizon_T;
  sched.constants = r.constants;
  sched.s.assign(static_cast<std::size_t>(c.horizon_T), r.s_star);
  switch (kind) {
    case ScheduleKind::w2_horizon: r.verdict = w2_horizon_feasible(sched); break;
    case ScheduleKind::kl_pointwise: r.verdict = kl_pointwise_feasible(sched); break;
    case ScheduleKind::kl_horizon: r.verdict = kl_horizon_feasible(sched); break;
  }
  r.feasible = r.verdict.feasible;

  DpSchedule dp;
  dp.s = sched.s;
  dp.noise_seed = derive_seed(seed, 0x03);
  r.schedule = std::move(dp);
  return r;
}

inline W2Config make_w2_config(const ExperimentConfig& c, int threads,
                               const DpResolution& dp) {
  W2Config wc;
  wc.eta = c.eta;
  wc.n_window = c.n_window;
  wc.inner_tol = c.inner_tol;
  wc.inner_max_iters = c.inner_max_iters;
  wc.mode = c.w2_mode == "certified" ? W2Config::Mode::certified : W2Config::Mode::permissive;
  wc.alpha = c.alpha;
  wc.declared_l = c.declared_l;
  wc.declared_L = c.declared_L;
  wc.declared_lw = c.declared_lw;
  wc.threads = threads;
  if (dp.enabled) wc.dp = dp.schedule;
  return wc;
}

inline ParticleFilterConfig make_kl_config(const ExperimentConfig& c, int threads,
                                           const DpResolution& dp) {
  ParticleFilterConfig kc;
  kc.eta = c.eta;
  kc.n_window = c.n_window;
  kc.n_particles = c.count;
  kc.resample_threshold = c.resample_threshold;
  kc.jitter_bandwidth = c.jitter_bandwidth;
  kc.threads = threads;
  if (c.propagation_noise > 0.0) {
    NoiseSpec spec;
    spec.process_bound = c.propagation_noise;
    kc.propagation_noise = spec;
  }
  if (dp.enabled) kc.dp = dp.schedule;
  return kc;
}

// Per-method outcome of a benchmark run. Runtimes go to stdout only; CSVs
// must stay byte-identical across thread counts.
struct EstimateArtifacts {
  std::string method;
  std::vector<Vec> means;  // estimates at k = 1..T
  Vec rmse_value;
  double seconds = 0.0;
  double seconds_per_step = 0.0;
};

struct BenchReport {
  Trajectory truth;
  DpResolution dp;
  std::vector<EstimateArtifacts> methods;
  std::vector<std::string> files;
};

namespace detail {

inline std::vector<Vec> truth_slice(const Trajectory& traj, int horizon_T) {
  return std::vector<Vec>(traj.states.begin() + 1, traj.states.begin() + 1 + horizon_T);
}

inline void write_truth_csv(const std::string& path, const Trajectory& traj) {
  const int d = static_cast<int>(traj.states.front().size());
  const int m = static_cast<int>(traj.outputs.front().size());
  std::vector<std::string> header{"k"};
  for (int i = 0; i < d; ++i) header.push_back("x" + std::to_string(i + 1));
  for (int i = 0; i < m; ++i) header.push_back("y" + std::to_string(i + 1));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    std::vector<double> row{static_cast<double>(k)};
    for (int i = 0; i < d; ++i) row.push_back(traj.states[k](i));
    for (int i = 0; i < m; ++i) row.push_back(traj.outputs[k](i));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

inline void write_w2_csv(const std::string& path, const W2RunResult& res) {
  const int d = static_cast<int>(res.steps.front().mean.size());
  std::vector<std::string> header{"k"};
  for (int i = 0; i < d; ++i) header.push_back("mean" + std::to_string(i + 1));
  header.push_back("cost_mean");
  header.push_back("grad_norm_mean");
  std::vector<std::vector<double>> rows;
  for (const auto& s : res.steps) {
    std::vector<double> row{static_cast<double>(s.k)};
    for (int i = 0; i < d; ++i) row.push_back(s.mean(i));
    double cm = 0.0, gm = 0.0;
    for (double v : s.costs) cm += v;
    for (double v : s.grad_norms) gm += v;
    row.push_back(cm / static_cast<double>(s.costs.size()));
    row.push_back(gm / static_cast<double>(s.grad_norms.size()));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

inline void write_kl_csv(const std::string& path, const KlRunResult& res) {
  const int d = static_cast<int>(res.steps.front().mean.size());
  std::vector<std::string> header{"k"};
  for (int i = 0; i < d; ++i) header.push_back("mean" + std::to_string(i + 1));
  header.push_back("ess");
  header.push_back("resampled");
  std::vector<std::vector<double>> rows;
  for (const auto& s : res.steps) {
    std::vector<double> row{static_cast<double>(s.k)};
    for (int i = 0; i < d; ++i) row.push_back(s.mean(i));
    row.push_back(s.ess);
    row.push_back(s.resampled ? 1.0 : 0.0);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

inline void write_samples_csv(const std::string& path, const std::vector<Ensemble>& ensembles) {
  const int d = ensembles.front().dim();
  std::vector<std::string> header{"k", "sample"};
  for (int i = 0; i < d; ++i) header.push_back("x" + std::to_string(i + 1));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < ensembles.size(); ++k)
    for (int i = 0; i < ensembles[k].size(); ++i) {
      std::vector<double> row{static_cast<double>(k), static_cast<double>(i)};
      for (int c = 0; c < d; ++c) row.push_back(ensembles[k].points[static_cast<std::size_t>(i)](c));
      rows.push_back(std::move(row));
    }
  write_csv(path, header, rows);
}

inline void write_metrics_csv(const std::string& path, const Vec& rmse_value) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < rmse_value.size(); ++i)
    rows.push_back({static_cast<double>(i + 1), rmse_value(i)});
  write_csv(path, {"coord", "rmse"}, rows);
}

}  // namespace detail

// Simulates the truth, runs the configured estimator(s), computes RMSE of the
// mean-estimate sequence over k = 1..T, and writes the run artifacts.
inline BenchReport run_benchmark(const ExperimentConfig& c, std::uint64_t seed,
                                 const std::string& out_dir, int threads, bool with_svg,
                                 bool with_samples = false) {
  const SystemModel model = make_model(c);
  const NoiseSpec noise = make_noise(c);
  if (c.horizon_T < 1) throw ConfigError("estimator horizon must be at least 1");
  std::filesystem::create_directories(out_dir);

  BenchReport report;
  const Vec x0 = default_truth_x0(c, model);
  report.truth = simulate(model, noise, x0, c.horizon_T + c.n_window, derive_seed(seed, 0x01));
  const Ensemble prior = make_prior(c, model, seed);
  report.dp = resolve_dp(c, model, prior.diameter(), seed);

  const std::vector<Vec> truth_states = detail::truth_slice(report.truth, c.horizon_T);
  const std::string truth_path = detail::join_path(out_dir, "truth.csv");
  detail::write_truth_csv(truth_path, report.truth);
  report.files.push_back(truth_path);

  const bool want_w2 = c.method == "w2" || c.method == "both";
  const bool want_kl = c.method == "kl" || c.method == "both";

  std::optional<W2RunResult> w2_res;
  std::optional<KlRunResult> kl_res;

  if (want_w2) {
    const W2Config wc = make_w2_config(c, threads, report.dp);
    const auto t0 = std::chrono::steady_clock::now();
    w2_res = run_w2(model, report.truth.outputs, prior, wc, c.horizon_T);
    EstimateArtifacts art;
    art.method = "w2";
    art.seconds = detail::seconds_since(t0);
    art.seconds_per_step = art.seconds / static_cast<double>(c.horizon_T);
    art.means = w2_res->means();
    art.rmse_value = rmse(art.means, truth_states);
    report.methods.push_back(std::move(art));

    const std::string est_path = detail::join_path(out_dir, "w2_estimates.csv");
    detail::write_w2_csv(est_path, *w2_res);
    report.files.push_back(est_path);
    const std::string met_path = detail::join_path(out_dir, "w2_metrics.csv");
    detail::write_metrics_csv(met_path, report.methods.back().rmse_value);
    report.files.push_back(met_path);
    if (with_samples) {
      const std::string samples_path = detail::join_path(out_dir, "w2_samples.csv");
      detail::write_samples_csv(samples_path, w2_res->ensembles);
      report.files.push_back(samples_path);
    }
  }

  if (want_kl) {
    const ParticleFilterConfig kc = make_kl_config(c, threads, report.dp);
    const auto t0 = std::chrono::steady_clock::now();
    kl_res = run_kl(model, report.truth.outputs, WeightedEnsemble::uniform(prior), kc,
                    c.horizon_T, derive_seed(seed, 0x04));
    EstimateArtifacts art;
    art.method = "kl";
    art.seconds = detail::seconds_since(t0);
    art.seconds_per_step = art.seconds / static_cast<double>(c.horizon_T);
    art.means = kl_res->means();
    art.rmse_value = rmse(art.means, truth_states);
    report.methods.push_back(std::move(art));

    const std::string est_path = detail::join_path(out_dir, "kl_estimates.csv");
    detail::write_kl_csv(est_path, *kl_res);
    report.files.push_back(est_path);
    const std::string met_path = detail::join_path(out_dir, "kl_metrics.csv");
    detail::write_metrics_csv(met_path, report.methods.back().rmse_value);
    report.files.push_back(met_path);
  }

  if (with_svg) {
    std::vector<SvgSeries> series;
    const int d = model.dim_state;
    std::vector<double> ks(static_cast<std::size_t>(c.horizon_T));
    for (int k = 1; k <= c.horizon_T; ++k) ks[static_cast<std::size_t>(k - 1)] = k;
    for (int coord = 0; coord < d; ++coord) {
      SvgSeries truth_series;
      truth_series.label = "truth x" + std::to_string(coord + 1);
      truth_series.xs = ks;
      for (const Vec& x : truth_states) truth_series.ys.push_back(x(coord));
      series.push_back(std::move(truth_series));
      for (const auto& art : report.methods) {
        SvgSeries est;
        est.label = art.method + " x" + std::to_string(coord + 1);
        est.xs = ks;
        for (const Vec& x : art.means) est.ys.push_back(x(coord));
        series.push_back(std::move(est));
      }
    }
    const std::string svg_path = detail::join_path(out_dir, "plot.svg");
    write_svg_plot(svg_path, "truth vs mean estimate", "k", "state", series);
    report.files.push_back(svg_path);
  }
  return report;
}

struct TradeoffRow {
  double epsilon = 0.0;
  double s_star = 1.0;
  bool feasible = true;
  Vec rmse_value;
};

// Sweeps the privacy budget: for each epsilon derive the maximal constant
// schedule, run the configured estimator under it, and record the RMSE.
// Every epsilon reuses the same master seed (common random numbers), which
// isolates the effect of the schedule.
inline std::vector<TradeoffRow> run_tradeoff_sweep(const ExperimentConfig& base,
                                                   const std::vector<double>& epsilons,
                                                   std::uint64_t seed,
                                                   const std::string& out_dir, int threads) {
  if (epsilons.empty()) throw ConfigError("trade-off sweep requires a nonempty epsilon list");
  std::filesystem::create_directories(out_dir);
  std::vector<TradeoffRow> rows;
  std::vector<double> sorted = epsilons;
  std::sort(sorted.begin(), sorted.end());
  for (double eps : sorted) {
    ExperimentConfig c = base;
    c.dp_enabled = true;
    c.dp_epsilon = eps;
    c.dp_s = 0.0;  // always derive the level from the budget
    if (c.method == "both") c.method = "w2";
    const BenchReport report = run_benchmark(c, seed, out_dir + "/eps_" + format_g17(eps),
                                             threads, /*with_svg=*/false);
    TradeoffRow row;
    row.epsilon = eps;
    row.s_star = report.dp.s_star;
    row.feasible = report.dp.feasible;
    row.rmse_value = report.methods.front().rmse_value;
    rows.push_back(std::move(row));
  }
  std::vector<std::string> header{"epsilon", "s_star", "feasible"};
  const int d = static_cast<int>(rows.front().rmse_value.size());
  for (int i = 0; i < d; ++i) header.push_back("rmse" + std::to_string(i + 1));
  std::vector<std::vector<double>> csv_rows;
  for (const auto& row : rows) {
    std::vector<double> r{row.epsilon, row.s_star, row.feasible ? 1.0 : 0.0};
    for (int i = 0; i < d; ++i) r.push_back(row.rmse_value(i));
    csv_rows.push_back(std::move(r));
  }
  write_csv(detail::join_path(out_dir, "tradeoff.csv"), header, csv_rows);
  return rows;
}

// Probe-grid observability scan driven by the [observability] config section.
inline ObservabilityReport run_observability(const ExperimentConfig& c,
                                             const std::string& out_dir) {
  const SystemModel model = make_model(c);
  std::filesystem::create_directories(out_dir);
  Vec lo = c.obs_lo.empty() ? Vec::Constant(model.dim_state, -2.0) : detail::to_vec(c.obs_lo);
  Vec hi = c.obs_hi.empty() ? Vec::Constant(model.dim_state, 2.0) : detail::to_vec(c.obs_hi);
  if (lo.size() != model.dim_state || hi.size() != model.dim_state)
    throw ConfigError("observability box dimension does not match the system state");
  if (c.obs_points < 1) throw ConfigError("observability grid needs at least one point per axis");

  std::vector<Vec> grid;
  if (model.dim_state == 1) {
    for (int i = 0; i < c.obs_points; ++i) {
      Vec x(1);
      x(0) = c.obs_points == 1
                 ? 0.5 * (lo(0) + hi(0))
                 : lo(0) + (hi(0) - lo(0)) * i / static_cast<double>(c.obs_points - 1);
      grid.push_back(x);
    }
  } else {
    for (int i = 0; i < c.obs_points; ++i)
      for (int j = 0; j < c.obs_points; ++j) {
        Vec x(2);
        x(0) = c.obs_points == 1
                   ? 0.5 * (lo(0) + hi(0))
                   : lo(0) + (hi(0) - lo(0)) * i / static_cast<double>(c.obs_points - 1);
        x(1) = c.obs_points == 1
                   ? 0.5 * (lo(1) + hi(1))
                   : lo(1) + (hi(1) - lo(1)) * j / static_cast<double>(c.obs_points - 1);
        grid.push_back(x);
      }
  }

  const ObservabilityReport report =
      find_min_horizon(model, grid, c.obs_t_max, c.obs_tol, c.obs_abs_floor);

  std::vector<std::string> header;
  for (int i = 0; i < model.dim_state; ++i) header.push_back("x" + std::to_string(i + 1));
  header.push_back("t");
  header.push_back("rank");
  std::vector<std::vector<double>> rows;
  for (std::size_t g = 0; g < report.grid.size(); ++g)
    for (int t = 0; t <= report.horizon_tested; ++t) {
      std::vector<double> row;
      for (int i = 0; i < model.dim_state; ++i) row.push_back(report.grid[g](i));
      row.push_back(static_cast<double>(t));
      row.push_back(static_cast<double>(report.rank_table[g][static_cast<std::size_t>(t)]));
      rows.push_back(std::move(row));
    }
  write_csv(detail::join_path(out_dir, "observability.csv"), header, rows);
  return report;
}

struct DpBudgetReport {
  DpResolution resolution;
  double pointwise_bound = 1.0;  // single-step s bound for the proximal scheme
};

// Feasibility report for the configured privacy budget, without running an
// estimator. The prior diameter comes from the same prior the estimators use.
inline DpBudgetReport run_dp_budget(const ExperimentConfig& c, std::uint64_t seed,
                                    const std::string& out_dir) {
  ExperimentConfig cfg = c;
  cfg.dp_enabled = true;
  const SystemModel model = make_model(cfg);
  std::filesystem::create_directories(out_dir);
  const Ensemble prior = make_prior(cfg, model, seed);
  DpBudgetReport report;
  report.resolution = resolve_dp(cfg, model, prior.diameter(), seed);
  report.pointwise_bound = w2_pointwise_s_bound(
      cfg.dp_epsilon, cfg.dp_delta, report.resolution.constants.l,
      report.resolution.constants.eta, report.resolution.constants.c_f1,
      report.resolution.constants.diam_k0, cfg.horizon_T);

  const FeasibilityVerdict& v = report.resolution.verdict;
  write_csv(detail::join_path(out_dir, "dp_budget.csv"),
            {"epsilon", "delta", "s_star", "feasible", "lhs", "rhs", "slack", "pointwise_s"},
            {{cfg.dp_epsilon, cfg.dp_delta, report.resolution.s_star,
              report.resolution.feasible ? 1.0 : 0.0, v.lhs, v.rhs, v.slack,
              report.pointwise_bound}});
  return report;
}

// Simulation-only artifact: truth trajectory CSV.
inline Trajectory run_simulate(const ExperimentConfig& c, std::uint64_t seed,
                               const std::string& out_dir) {
  const SystemModel model = make_model(c);
  std::filesystem::create_directories(out_dir);
  const Vec x0 = default_truth_x0(c, model);
  const Trajectory traj =
      simulate(model, make_noise(c), x0, c.horizon_T + c.n_window, derive_seed(seed, 0x01));
  detail::write_truth_csv(detail::join_path(out_dir, "truth.csv"), traj);
  return traj;
}

}  // namespace mhe

#endif  // MHE_HARNESS_HPP

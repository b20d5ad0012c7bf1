// Command-line front end for the moving-horizon estimation toolkit.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 infeasible certificate request (step-size window or privacy budget).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mhe/harness.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out = ".";
  int threads = 1;
  bool strict = false;
};

mhe::ExperimentConfig load_config(const GlobalArgs& g) {
  if (g.config_path.empty()) return mhe::ExperimentConfig{};
  return mhe::ExperimentConfig::load(mhe::ConfigStore::from_file(g.config_path));
}

std::string format_vec(const mhe::Vec& v) {
  std::string out = "(";
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += mhe::format_g17(v(i));
  }
  return out + ")";
}

void print_dp_summary(const mhe::DpResolution& dp) {
  if (!dp.enabled) return;
  std::cout << "privacy: s=" << mhe::format_g17(dp.s_star)
            << (dp.derived ? " (derived from budget)" : " (explicit)") << ", "
            << (dp.feasible ? "budget satisfied" : "budget NOT satisfied");
  if (!dp.verdict.trivial)
    std::cout << " [lhs=" << mhe::format_g17(dp.verdict.lhs)
              << " rhs=" << mhe::format_g17(dp.verdict.rhs) << "]";
  std::cout << "\n";
}

void enforce_strict_dp(const mhe::DpResolution& dp, bool strict) {
  if (strict && dp.enabled && !dp.feasible)
    throw mhe::InfeasibleError("privacy budget cannot be met by the requested schedule");
}

int cmd_simulate(const GlobalArgs& g) {
  const mhe::ExperimentConfig cfg = load_config(g);
  const mhe::Trajectory traj = mhe::run_simulate(cfg, g.seed, g.out);
  std::cout << "simulated " << traj.states.size() - 1 << " steps of " << cfg.system_name
            << " (seed " << traj.seed << ")\n";
  std::cout << "wrote " << g.out << "/truth.csv\n";
  return 0;
}

int cmd_estimate(const GlobalArgs& g, const std::string& method_override, bool with_samples) {
  mhe::ExperimentConfig cfg = load_config(g);
  if (!method_override.empty()) cfg.method = method_override;

  // Check the privacy budget before paying for the run.
  {
    const mhe::SystemModel model = mhe::make_model(cfg);
    const mhe::Ensemble prior = mhe::make_prior(cfg, model, g.seed);
    const mhe::DpResolution dp = mhe::resolve_dp(cfg, model, prior.diameter(), g.seed);
    enforce_strict_dp(dp, g.strict);
  }

  const mhe::BenchReport report =
      mhe::run_benchmark(cfg, g.seed, g.out, g.threads, /*with_svg=*/false, with_samples);
  print_dp_summary(report.dp);
  for (const auto& art : report.methods)
    std::cout << art.method << ": rmse=" << format_vec(art.rmse_value) << " runtime="
              << art.seconds << "s (" << art.seconds_per_step << "s/step)\n";
  for (const auto& f : report.files) std::cout << "wrote " << f << "\n";
  return 0;
}

int cmd_bench(const GlobalArgs& g, bool with_samples) {
  const mhe::ExperimentConfig cfg = load_config(g);
  {
    const mhe::SystemModel model = mhe::make_model(cfg);
    const mhe::Ensemble prior = mhe::make_prior(cfg, model, g.seed);
    const mhe::DpResolution dp = mhe::resolve_dp(cfg, model, prior.diameter(), g.seed);
    enforce_strict_dp(dp, g.strict);
  }
  const mhe::BenchReport report =
      mhe::run_benchmark(cfg, g.seed, g.out, g.threads, /*with_svg=*/true, with_samples);
  print_dp_summary(report.dp);
  for (const auto& art : report.methods)
    std::cout << art.method << ": rmse=" << format_vec(art.rmse_value) << " runtime="
              << art.seconds << "s (" << art.seconds_per_step << "s/step)\n";
  if (report.methods.size() == 2) {
    const double ratio =
        report.methods[0].seconds_per_step / report.methods[1].seconds_per_step;
    std::cout << "step-time ratio " << report.methods[0].method << "/"
              << report.methods[1].method << " = " << ratio << "\n";
  }
  for (const auto& f : report.files) std::cout << "wrote " << f << "\n";
  return 0;
}

int cmd_observability(const GlobalArgs& g) {
  const mhe::ExperimentConfig cfg = load_config(g);
  const mhe::ObservabilityReport report = mhe::run_observability(cfg, g.out);
  std::cout << "scanned horizons 0.." << report.horizon_tested << " over "
            << report.grid.size() << " probe states\n";
  if (report.min_horizon_estimate)
    std::cout << "minimum full-rank horizon: " << *report.min_horizon_estimate << "\n";
  else
    std::cout << "no horizon up to " << report.horizon_tested
              << " reaches full rank at every probe state\n";
  std::cout << report.failures.size() << " (state, horizon) pairs below full rank\n";
  std::cout << "wrote " << g.out << "/observability.csv\n";
  return 0;
}

int cmd_dp_budget(const GlobalArgs& g) {
  const mhe::ExperimentConfig cfg = load_config(g);
  const mhe::DpBudgetReport report = mhe::run_dp_budget(cfg, g.seed, g.out);
  const mhe::DpResolution& r = report.resolution;
  std::cout << "schedule kind: " << cfg.dp_kind << "\n";
  std::cout << "constants: l=" << mhe::format_g17(r.constants.l)
            << " eta=" << mhe::format_g17(r.constants.eta)
            << " c_f1=" << mhe::format_g17(r.constants.c_f1)
            << " diam=" << mhe::format_g17(r.constants.diam_k0) << "\n";
  std::cout << "budget epsilon=" << mhe::format_g17(cfg.dp_epsilon)
            << " delta=" << mhe::format_g17(cfg.dp_delta) << " over T=" << cfg.horizon_T
            << " steps\n";
  std::cout << "maximal constant level s* = " << mhe::format_g17(r.s_star) << "\n";
  std::cout << "single-step proximal bound s <= " << mhe::format_g17(report.pointwise_bound)
            << "\n";
  if (r.verdict.trivial)
    std::cout << "constraint holds trivially (zero adjacency radius or support diameter)\n";
  else
    std::cout << "constraint at s*: lhs=" << mhe::format_g17(r.verdict.lhs)
              << " rhs=" << mhe::format_g17(r.verdict.rhs)
              << " slack=" << mhe::format_g17(r.verdict.slack)
              << (r.feasible ? " (feasible)" : " (INFEASIBLE)") << "\n";
  std::cout << "wrote " << g.out << "/dp_budget.csv\n";
  enforce_strict_dp(r, g.strict);
  return 0;
}

int cmd_tradeoff(const GlobalArgs& g) {
  const mhe::ExperimentConfig cfg = load_config(g);
  const std::vector<mhe::TradeoffRow> rows =
      mhe::run_tradeoff_sweep(cfg, cfg.tradeoff_epsilons, g.seed, g.out, g.threads);
  bool any_infeasible = false;
  for (const auto& row : rows) {
    std::cout << "epsilon=" << mhe::format_g17(row.epsilon)
              << " s*=" << mhe::format_g17(row.s_star)
              << " rmse=" << format_vec(row.rmse_value)
              << (row.feasible ? "" : " [infeasible]") << "\n";
    any_infeasible = any_infeasible || !row.feasible;
  }
  std::cout << "wrote " << g.out << "/tradeoff.csv\n";
  if (g.strict && any_infeasible)
    throw mhe::InfeasibleError("trade-off sweep contains infeasible budgets");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moving-horizon estimation toolkit"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "INI experiment description");
  app.add_option("--seed", g.seed, "master seed (all randomness derives from it)");
  app.add_option("--out", g.out, "output directory for CSV/SVG artifacts");
  app.add_option("--threads", g.threads, "worker threads for per-sample loops");
  app.add_flag("--strict", g.strict, "fail (exit 4) when a privacy budget is infeasible");

  auto* sim = app.add_subcommand("simulate", "simulate the truth trajectory and write truth.csv");
  auto* est = app.add_subcommand("estimate", "run an estimator against a simulated truth");
  std::string method_override;
  bool est_samples = false;
  est->add_option("--method", method_override, "estimator: w2, kl, or both")
      ->check(CLI::IsMember({"w2", "kl", "both"}));
  est->add_flag("--samples", est_samples, "also write per-sample states");
  auto* obs = app.add_subcommand("observability", "rank scan over a probe grid");
  auto* dpb = app.add_subcommand("dp-budget", "privacy-budget feasibility report");
  auto* tro = app.add_subcommand("tradeoff", "privacy/accuracy sweep over epsilon values");
  auto* ben = app.add_subcommand("bench", "run estimator(s), write artifacts and a plot");
  bool ben_samples = false;
  ben->add_flag("--samples", ben_samples, "also write per-sample states");
  for (auto* sub : {sim, est, obs, dpb, tro, ben}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!g.out.empty() && g.out != ".") std::filesystem::create_directories(g.out);
    if (sim->parsed()) return cmd_simulate(g);
    if (est->parsed()) return cmd_estimate(g, method_override, est_samples);
    if (obs->parsed()) return cmd_observability(g);
    if (dpb->parsed()) return cmd_dp_budget(g);
    if (tro->parsed()) return cmd_tradeoff(g);
    if (ben->parsed()) return cmd_bench(g, ben_samples);
  } catch (const mhe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mhe::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const mhe::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

#include "replica/commands.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>

#include "replica/observation.hpp"
#include "replica/report.hpp"

namespace replica {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_training_artifacts(const fs::path& dir, const std::vector<MetricsRow>& rows) {
  {
    auto out = open_output(dir / "metrics.csv");
    write_metrics_csv(out, rows);
  }
  {
    auto out = open_output(dir / "timing.csv");
    write_timing_csv(out, rows);
  }
  std::vector<double> steps, rewards, entropies;
  for (const auto& r : rows) {
    steps.push_back(static_cast<double>(r.timestep));
    rewards.push_back(r.mean_reward);
    entropies.push_back(r.entropy);
  }
  write_line_chart_svg(dir / "learning_curve.svg", "mean reward per update", steps, rewards);
  write_line_chart_svg(dir / "entropy_curve.svg", "policy entropy per update", steps, entropies);
}

bool same_environment(const ExperimentConfig& a, const ExperimentConfig& b) {
  const auto& x = a.cluster;
  const auto& y = b.cluster;
  return x.num_nodes == y.num_nodes && x.num_blocks == y.num_blocks &&
         x.node_capacity == y.node_capacity && x.max_replication == y.max_replication &&
         x.initial_replication == y.initial_replication && x.tau == y.tau &&
         x.episode_length == y.episode_length &&
         a.workload.num_distributions == b.workload.num_distributions &&
         a.workload.zipf_exponent == b.workload.zipf_exponent &&
         a.workload.poisson_mean == b.workload.poisson_mean &&
         a.workload.rotation_period == b.workload.rotation_period;
}

}  // namespace

Checkpoint make_checkpoint(const ExperimentConfig& config, const TrainResult& result) {
  return Checkpoint{kCheckpointVersion, format_experiment_config(config), result.params,
                    result.env_rng_states};
}

TrainOutcome run_train(const ExperimentConfig& config, std::ostream& log) {
  if (!is_learned(config.policy)) {
    throw std::invalid_argument("train needs policy rl_e or rl_ne, got " +
                                std::string(policy_name(config.policy)));
  }
  fs::create_directories(config.output_dir);
  const TrainSetup setup{config.cluster, config.workload, config.ppo, config.seed};

  log << "training " << policy_name(config.policy) << ": M=" << config.cluster.num_nodes
      << " C=" << config.cluster.num_blocks << " timesteps=" << config.ppo.total_timesteps
      << " updates=" << num_updates(config.ppo) << " seed=" << config.seed << '\n';

  TrainOutcome outcome;
  try {
    outcome.result = train(setup, [&log](const MetricsRow& row) {
      log << "  t=" << row.timestep << " reward=" << format_double(row.mean_reward)
          << " variance=" << format_double(row.mean_variance)
          << " entropy=" << format_double(row.entropy) << '\n';
    });
  } catch (const TrainingDiverged& e) {
    write_training_artifacts(config.output_dir, e.metrics);
    throw;
  }

  write_training_artifacts(config.output_dir, outcome.result.metrics);
  outcome.metrics_csv = config.output_dir / "metrics.csv";
  outcome.checkpoint = config.output_dir / "checkpoint.bin";
  save_checkpoint(make_checkpoint(config, outcome.result), outcome.checkpoint);

  const auto& rows = outcome.result.metrics;
  if (!rows.empty()) {
    log << "final mean variance " << format_double(rows.back().mean_variance) << ", wall time "
        << format_double(rows.back().wall_seconds) << " s\n";
  }
  log << "wrote " << outcome.metrics_csv.string() << " and " << outcome.checkpoint.string() << '\n';
  return outcome;
}

Entrant parse_entrant(std::string_view token) {
  Entrant e;
  std::string path_text(token);
  const auto eq = token.find('=');
  if (eq != std::string_view::npos) {
    e.label = std::string(token.substr(0, eq));
    path_text = std::string(token.substr(eq + 1));
  }
  if (eq == std::string_view::npos) {
    if (const auto kind = parse_policy_kind(token)) {
      e.kind = *kind;
      e.label = std::string(token);
      return e;
    }
  }
  e.checkpoint = path_text;
  if (!fs::exists(e.checkpoint)) {
    throw std::invalid_argument("entrant '" + std::string(token) +
                                "' is neither a policy name nor an existing checkpoint");
  }
  const Checkpoint ck = load_checkpoint(e.checkpoint);
  e.kind = parse_experiment_config(ck.config_text).policy;
  if (e.label.empty()) e.label = std::string(policy_name(e.kind)) + ":" + e.checkpoint.string();
  return e;
}

StepPolicy make_entrant_policy(const ExperimentConfig& config, const Entrant& entrant,
                               ClusterConfig& cluster_out, std::ostream& log) {
  cluster_out = config.cluster;
  switch (entrant.kind) {
    case PolicyKind::kStatic:
      return make_baseline_policy(BaselineKind::kStatic, config.seed);
    case PolicyKind::kRandom:
      return make_baseline_policy(BaselineKind::kRandom, config.seed);
    case PolicyKind::kGreedy:
      return make_baseline_policy(BaselineKind::kGreedyBalance, config.seed);
    case PolicyKind::kRlE:
    case PolicyKind::kRlNe:
      break;
  }

  PolicyParams params;
  if (entrant.checkpoint.empty()) {
    ExperimentConfig sub = config;
    sub.policy = entrant.kind;
    sub.output_dir = config.output_dir / entrant.label;
    finalize(sub);
    params = run_train(sub, log).result.params;
  } else {
    Checkpoint ck = load_checkpoint(entrant.checkpoint);
    params = std::move(ck.params);
  }
  const bool allow_erase = entrant.kind == PolicyKind::kRlE;
  cluster_out.allow_erase = allow_erase;
  const ActionSpace space(cluster_out.num_nodes, allow_erase);
  const NetDims dims = params.dims();
  const auto expected_input = static_cast<int>(
      observation_size(cluster_out.num_nodes, cluster_out.node_capacity, cluster_out.num_blocks));
  if (dims.input != expected_input || dims.actions != space.size()) {
    throw std::invalid_argument(
        "checkpoint dimensions (input " + std::to_string(dims.input) + ", actions " +
        std::to_string(dims.actions) + ") do not match config (input " +
        std::to_string(expected_input) + ", actions " + std::to_string(space.size()) + ")");
  }
  return make_network_policy(std::move(params), space, config.stochastic_eval, config.seed);
}

EvalReport run_evaluate(const ExperimentConfig& config, const Entrant& entrant, std::ostream& log) {
  ClusterConfig cluster;
  const StepPolicy policy = make_entrant_policy(config, entrant, cluster, log);
  EvalReport report = evaluate_policy(cluster, config.workload, policy, config.eval_episodes,
                                      config.eval_seed, entrant.label);
  log << entrant.label << ": " << report.episodes << " episodes, mean variance "
      << format_double(report.mean_variance) << " (std " << format_double(report.std_variance)
      << "), mean reward " << format_double(report.mean_reward) << ", ignored fraction "
      << format_double(report.ignored_fraction) << '\n';
  return report;
}

std::vector<EvalReport> run_compare(const ExperimentConfig& config,
                                    const std::vector<Entrant>& entrants, std::ostream& log) {
  if (entrants.size() < 2) throw std::invalid_argument("compare needs at least two entrants");
  for (const auto& e : entrants) {
    if (e.checkpoint.empty()) continue;
    const ExperimentConfig trained = parse_experiment_config(load_checkpoint(e.checkpoint).config_text);
    if (!same_environment(trained, config)) {
      throw std::invalid_argument("entrant '" + e.label +
                                  "' was trained on a different cluster/workload config");
    }
  }
  fs::create_directories(config.output_dir);

  std::vector<EvalReport> reports;
  for (const auto& e : entrants) {
    ClusterConfig cluster;
    const StepPolicy policy = make_entrant_policy(config, e, cluster, log);
    reports.push_back(evaluate_policy(cluster, config.workload, policy, config.eval_episodes,
                                      config.eval_seed, e.label));
  }

  auto out = open_output(config.output_dir / "comparison.csv");
  write_comparison_csv(out, reports);
  log << "M=" << config.cluster.num_nodes << " C=" << config.cluster.num_blocks << ", "
      << config.eval_episodes << " evaluation episodes (eval seed " << config.eval_seed << ")\n";
  print_comparison_table(log, reports);
  return reports;
}

void run_sweep(const ExperimentConfig& config, const std::vector<Entrant>& entrants,
               std::ostream& log) {
  for (const auto& e : entrants) {
    if (!e.checkpoint.empty()) {
      throw std::invalid_argument("sweep trains its own RL entrants; pass names, not checkpoints");
    }
  }
  fs::create_directories(config.output_dir);
  auto summary = open_output(config.output_dir / "sweep_summary.csv");
  summary << "num_nodes,num_blocks,initial_replication,rl_entrant,rl_mean_variance,best_baseline,"
             "best_baseline_mean_variance,relative_gap\n";

  for (const int nodes : {4, 6, 8}) {
    for (const int blocks : {128, 256}) {
      ExperimentConfig cell = config;
      cell.cluster.num_nodes = nodes;
      cell.cluster.num_blocks = blocks;
      cell.cluster.tau = default_tau(nodes, cell.workload.poisson_mean);
      // At B=120 the C=256 cells for M=4 and M=6 cannot hold 3 replicas per
      // block; start those from the largest replication that fits.
      const int fits = nodes * cell.cluster.node_capacity / blocks;
      if (cell.cluster.initial_replication > fits) {
        log << "m" << nodes << " c" << blocks << ": initial_replication capped at " << fits
            << " to fit node capacity\n";
        cell.cluster.initial_replication = fits;
      }
      cell.output_dir = config.output_dir / ("m" + std::to_string(nodes) + "_c" + std::to_string(blocks));
      finalize(cell);
      const std::vector<EvalReport> reports = run_compare(cell, entrants, log);

      const EvalReport* best_baseline = nullptr;
      for (std::size_t i = 0; i < entrants.size(); ++i) {
        if (is_learned(entrants[i].kind)) continue;
        if (!best_baseline || reports[i].mean_variance < best_baseline->mean_variance) {
          best_baseline = &reports[i];
        }
      }
      for (std::size_t i = 0; i < entrants.size(); ++i) {
        if (!is_learned(entrants[i].kind) || !best_baseline) continue;
        const double gap = (best_baseline->mean_variance - reports[i].mean_variance) /
                           best_baseline->mean_variance;
        summary << nodes << ',' << blocks << ',' << cell.cluster.initial_replication << ','
                << reports[i].entrant << ','
                << format_double(reports[i].mean_variance) << ',' << best_baseline->entrant << ','
                << format_double(best_baseline->mean_variance) << ',' << format_double(gap) << '\n';
        log << "  " << reports[i].entrant << " vs " << best_baseline->entrant
            << ": relative variance gap " << format_double(gap) << '\n';
      }
    }
  }
  log << "gap trend over M is descriptive only; see " << (config.output_dir / "sweep_summary.csv").string()
      << '\n';
}

WorkloadStats run_workload_stats(const ExperimentConfig& config, long long steps, std::ostream& log) {
  if (steps < 1) throw std::invalid_argument("workload-stats needs at least one step");
  fs::create_directories(config.output_dir);
  Workload workload(config.workload);
  const int c = config.workload.num_blocks;

  std::vector<long long> observed(c, 0);
  std::vector<double> expected(c, 0.0);
  std::map<int, long long> batch_hist;
  WorkloadStats stats;
  stats.steps = steps;
  double sum = 0.0;
  double sum_sq = 0.0;

  for (long long t = 0; t < steps; ++t) {
    const std::vector<double> pmf = workload.mixture_pmf();
    const std::vector<int> batch = workload.sample_request_batch();
    for (int block : batch) ++observed[block];
    for (int b = 0; b < c; ++b) expected[b] += pmf[b] * static_cast<double>(batch.size());
    ++batch_hist[static_cast<int>(batch.size())];
    sum += static_cast<double>(batch.size());
    sum_sq += static_cast<double>(batch.size()) * static_cast<double>(batch.size());
    workload.advance_clock();
  }
  stats.requests = std::accumulate(observed.begin(), observed.end(), 0LL);
  stats.batch_mean = sum / steps;
  stats.batch_variance = steps > 1 ? (sum_sq - sum * sum / steps) / (steps - 1) : 0.0;

  // Pearson chi-square; cells with expected count < 5 are pooled.
  int bins = 0;
  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  for (int b = 0; b < c; ++b) {
    if (expected[b] < 5.0) {
      pooled_obs += static_cast<double>(observed[b]);
      pooled_exp += expected[b];
      continue;
    }
    const double d = static_cast<double>(observed[b]) - expected[b];
    stats.chi_square += d * d / expected[b];
    ++bins;
  }
  if (pooled_exp > 0.0) {
    stats.chi_square += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++bins;
  }
  stats.degrees_of_freedom = std::max(0, bins - 1);
  if (stats.degrees_of_freedom > 0) {
    const boost::math::chi_squared dist(stats.degrees_of_freedom);
    stats.p_value = boost::math::cdf(boost::math::complement(dist, stats.chi_square));
  }

  std::vector<double> empirical(c), analytic(c);
  const double total = std::max<double>(1.0, static_cast<double>(stats.requests));
  const double expected_total = std::accumulate(expected.begin(), expected.end(), 0.0);
  for (int b = 0; b < c; ++b) {
    empirical[b] = static_cast<double>(observed[b]) / total;
    analytic[b] = expected_total > 0.0 ? expected[b] / expected_total : 0.0;
  }
  {
    auto out = open_output(config.output_dir / "block_frequency.csv");
    out << "block,observed_count,expected_count\n";
    for (int b = 0; b < c; ++b) out << b << ',' << observed[b] << ',' << format_double(expected[b]) << '\n';
  }
  std::sort(empirical.begin(), empirical.end(), std::greater<>());
  std::sort(analytic.begin(), analytic.end(), std::greater<>());
  {
    auto out = open_output(config.output_dir / "rank_frequency.csv");
    out << "rank,empirical_frequency,analytic_frequency\n";
    for (int k = 0; k < c; ++k) {
      out << k + 1 << ',' << format_double(empirical[k]) << ',' << format_double(analytic[k]) << '\n';
    }
  }
  {
    auto out = open_output(config.output_dir / "batch_sizes.csv");
    out << "batch_size,count\n";
    for (const auto& [size, count] : batch_hist) out << size << ',' << count << '\n';
  }
  {
    auto out = open_output(config.output_dir / "workload_summary.csv");
    out << "steps,requests,batch_mean,batch_variance,chi_square,degrees_of_freedom,p_value\n"
        << stats.steps << ',' << stats.requests << ',' << format_double(stats.batch_mean) << ','
        << format_double(stats.batch_variance) << ',' << format_double(stats.chi_square) << ','
        << stats.degrees_of_freedom << ',' << format_double(stats.p_value) << '\n';
  }
  stats.rank_frequency = std::move(empirical);

  log << "workload: " << steps << " steps, " << stats.requests << " requests, batch mean "
      << format_double(stats.batch_mean) << ", batch variance " << format_double(stats.batch_variance)
      << "\nchi-square " << format_double(stats.chi_square) << " on " << stats.degrees_of_freedom
      << " dof, p = " << format_double(stats.p_value) << '\n';
  return stats;
}

}  // namespace replica

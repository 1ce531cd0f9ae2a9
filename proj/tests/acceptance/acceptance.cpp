// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 6, 7 and 9 share five 100k-timestep training runs.
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "replica/baselines.hpp"
#include "replica/commands.hpp"
#include "replica/evaluation.hpp"
#include "replica/experiment.hpp"
#include "replica/observation.hpp"
#include "support/ppo_oracle.hpp"

using namespace replica;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int number, bool pass, const std::string& detail, double seconds) {
  if (!pass) ++failures;
  std::printf("criterion %d: %s  %s  (%.1f s)\n", number, pass ? "PASS" : "FAIL", detail.c_str(),
              seconds);
  std::fflush(stdout);
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Mean, then mean squared deviation.
double two_pass_variance(const std::vector<std::int64_t>& x) {
  double mean = 0.0;
  for (auto v : x) mean += static_cast<double>(v);
  mean /= static_cast<double>(x.size());
  double sq = 0.0;
  for (auto v : x) sq += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
  return sq / static_cast<double>(x.size());
}

void variance_oracle() {
  Timer timer;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> nodes(2, 16);
  std::uniform_int_distribution<std::int64_t> load(0, 1000);
  std::uniform_real_distribution<double> tau(1e-4, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<std::int64_t> loads(nodes(rng));
    for (auto& v : loads) v = load(rng);
    const double t = tau(rng);
    const double expected = -t * two_pass_variance(loads);
    const double got = compute_reward(loads, t);
    const double err = expected == 0.0 ? std::abs(got) : std::abs(got - expected) / std::abs(expected);
    worst = std::max(worst, err);
  }
  report(1, worst <= 1e-9, fmt("max relative error %.2e over 10^4 load vectors", worst),
         timer.seconds());
}

void safety_fuzz() {
  Timer timer;
  ClusterConfig cc;
  WorkloadConfig wc;
  ReplicationEnv env(cc, wc, 202);
  Rng rng = make_rng(202, Stream::kBaseline);
  long long violations = 0, ignored = 0, mutated_on_ignore = 0;
  std::string first;
  for (int i = 0; i < 100000; ++i) {
    const std::vector<std::uint8_t> before(env.state().placement().begin(),
                                           env.state().placement().end());
    const bool applied = env.step(random_action(cc.num_nodes, rng)).action_applied;
    const auto& s = env.state();
    if (!applied) {
      ++ignored;
      if (!std::equal(before.begin(), before.end(), s.placement().begin())) ++mutated_on_ignore;
    }
    bool bad = false;
    for (int b = 0; b < s.num_blocks(); ++b) {
      bad |= s.replication(b) < 1 || s.replication(b) > cc.max_replication;
    }
    for (int m = 0; m < s.num_nodes(); ++m) bad |= s.node_fill(m) > cc.node_capacity;
    const auto why = find_invariant_violation(s, cc);
    if (bad || why) {
      if (first.empty()) first = why.value_or("replication or capacity bound");
      ++violations;
    }
    if (env.episode_done()) env.reset();
  }
  report(2, violations == 0 && mutated_on_ignore == 0,
         fmt("10^5 random actions, %lld ignored, %lld invariant violations, %lld ignored actions "
             "changed placement%s%s",
             ignored, violations, mutated_on_ignore, first.empty() ? "" : ": ", first.c_str()),
         timer.seconds());
}

void codec_bijection() {
  Timer timer;
  long long checked = 0, bad = 0;
  for (int m = 2; m <= 16; ++m) {
    std::vector<int> seen(num_actions(m), 0);
    for (int i = 0; i < num_actions(m); ++i) {
      const Action a = decode_action(i, m);
      ++checked;
      if (encode_action(a, m) != i) ++bad;
      ++seen[encode_action(a, m)];
    }
    for (int s : seen) bad += s != 1;
  }
  report(3, bad == 0, fmt("%lld indices round-tripped for M = 2..16, %lld mismatches", checked, bad),
         timer.seconds());
}

void workload_fidelity() {
  Timer timer;
  WorkloadConfig wc;
  wc.rotation_period = 0;
  wc.seed = 303;
  Workload w(wc);

  // Analytic mixture from the hot-set permutations, computed here rather than
  // through the generator's own tables.
  const int c = wc.num_blocks;
  double harmonic = 0.0;
  for (int k = 1; k <= c; ++k) harmonic += std::pow(k, -wc.zipf_exponent);
  std::vector<double> pmf(c, 0.0);
  for (const auto& perm : w.permutations()) {
    for (int k = 1; k <= c; ++k) {
      pmf[perm[k - 1]] += std::pow(k, -wc.zipf_exponent) / harmonic / wc.num_distributions;
    }
  }

  std::vector<long long> counts(c, 0);
  long long n = 0;
  while (n < 1000000) {
    for (int block : w.sample_request_batch()) {
      if (n == 1000000) break;
      ++counts[block];
      ++n;
    }
    w.advance_clock();
  }
  // Pool the coldest blocks until every cell expects at least 5 draws.
  std::vector<int> order(c);
  for (int i = 0; i < c; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return pmf[a] > pmf[b]; });
  double chi = 0.0, pool_e = 0.0, pool_o = 0.0;
  int cells = 0;
  for (int b : order) {
    const double e = pmf[b] * static_cast<double>(n);
    if (e >= 5.0) {
      chi += (counts[b] - e) * (counts[b] - e) / e;
      ++cells;
    } else {
      pool_e += e;
      pool_o += static_cast<double>(counts[b]);
    }
  }
  if (pool_e > 0.0) {
    chi += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
    ++cells;
  }
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(cells - 1), chi));

  WorkloadConfig bc = wc;
  bc.seed = 304;
  Workload batches(bc);
  double total = 0.0;
  for (int t = 0; t < 100000; ++t) {
    total += static_cast<double>(batches.sample_request_batch().size());
    batches.advance_clock();
  }
  const double mean = total / 100000.0;
  report(4, p > 0.001 && mean >= 198.0 && mean <= 202.0,
         fmt("chi^2 = %.1f on %d dof, p = %.4f; batch mean %.3f over 10^5 steps", chi, cells - 1, p,
             mean),
         timer.seconds());
}

void gradient_check() {
  Timer timer;
  std::mt19937_64 rng(505);
  const NetDims dims{6, 4, 12};
  std::uniform_real_distribution<double> coef(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const PolicyParams p = oracle::random_params(dims, rng);
    PpoConfig cfg;
    cfg.value_coef = coef(rng);
    cfg.entropy_coef = 0.1 * coef(rng);
    const oracle::Minibatch mb = oracle::random_minibatch(p, 16, cfg.clip_epsilon, rng);
    const LossTerms t = ppo_loss(p, mb.matrix(), mb.actions, mb.old_log_probs, mb.advantages,
                                 mb.returns, cfg);
    const auto numeric = oracle::finite_difference(
        p, [&](const PolicyParams& q) { return oracle::naive_ppo_loss(q, mb, cfg); }, 1e-5);
    worst = std::max(worst, oracle::max_relative_error(oracle::flatten(t.gradients), numeric));
  }
  report(5, worst < 1e-4, fmt("max relative error %.2e over 100 trials", worst), timer.seconds());
}

void observation_shape() {
  Timer timer;
  std::string detail;
  bool pass = true;
  for (int m : {4, 6, 8}) {
    for (int c : {128, 256}) {
      ClusterConfig cc;
      cc.num_nodes = m;
      cc.num_blocks = c;
      cc.initial_replication = std::min(cc.initial_replication, m * cc.node_capacity / c);
      const ClusterState s = init_cluster(cc, 808ULL);
      const auto length = encode_observation(s, cc.node_capacity, default_count_scale(m, 200.0)).size();
      const auto expected = static_cast<std::size_t>(m * (cc.node_capacity + c));
      pass &= length == expected && observation_size(m, cc.node_capacity, c) == static_cast<int>(expected);
      detail += fmt("%sM=%d C=%d: %zu", detail.empty() ? "" : ", ", m, c, length);
    }
  }
  report(8, pass, detail, timer.seconds());
}

double least_squares_slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void learning_and_ordering(const fs::path& root) {
  const int seeds = 5;
  int rising = 0, falling_entropy = 0, beats_both = 0;
  std::vector<TrainOutcome> runs;
  Timer train_timer;
  for (int seed = 1; seed <= seeds; ++seed) {
    ExperimentConfig c = default_experiment_config();
    c.seed = static_cast<std::uint64_t>(seed);
    c.output_dir = root / ("seed" + std::to_string(seed));
    finalize(c);
    std::ostringstream log;
    runs.push_back(run_train(c, log));
    const auto& m = runs.back().result.metrics;
    const std::size_t k = std::max<std::size_t>(1, m.size() / 10);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      first += m[i].mean_reward / k;
      last += m[m.size() - k + i].mean_reward / k;
    }
    std::vector<double> entropy;
    for (const auto& row : m) entropy.push_back(row.entropy);
    const double slope = least_squares_slope(entropy);
    rising += last > first;
    falling_entropy += slope < 0.0;
    std::printf("  seed %d: %zu updates, reward first 10%% %.5f, last 10%% %.5f, entropy slope %.5f\n",
                seed, m.size(), first, last, slope);
    std::fflush(stdout);
  }
  report(6, rising >= 4 && falling_entropy >= 4,
         fmt("reward rose in %d/5 seeds, entropy trend negative in %d/5 seeds", rising, falling_entropy),
         train_timer.seconds());

  Timer eval_timer;
  const ExperimentConfig base = [] {
    ExperimentConfig c = default_experiment_config();
    finalize(c);
    return c;
  }();
  const ActionSpace space(base.cluster.num_nodes, true);
  auto baseline = [&](BaselineKind kind) {
    return evaluate_policy(base.cluster, base.workload, make_baseline_policy(kind, 1), base.eval_episodes,
                           base.eval_seed, std::string(baseline_name(kind)));
  };
  const EvalReport st = baseline(BaselineKind::kStatic);
  const EvalReport rnd = baseline(BaselineKind::kRandom);
  const EvalReport greedy = baseline(BaselineKind::kGreedyBalance);
  for (int seed = 1; seed <= seeds; ++seed) {
    const PolicyParams& params = runs[seed - 1].result.params;
    const EvalReport rl = evaluate_policy(
        base.cluster, base.workload,
        make_network_policy(params, space, base.stochastic_eval, static_cast<std::uint64_t>(seed)),
        base.eval_episodes, base.eval_seed, "rl_e");
    const EvalReport argmax = evaluate_policy(
        base.cluster, base.workload,
        make_network_policy(params, space, false, static_cast<std::uint64_t>(seed)),
        base.eval_episodes, base.eval_seed, "rl_e argmax");
    const bool win = rl.mean_variance < st.mean_variance && rl.mean_variance < rnd.mean_variance;
    beats_both += win;
    std::printf("  seed %d: rl_e %.2f (argmax %.2f, ignored %.3f)  %s\n", seed, rl.mean_variance,
                argmax.mean_variance, argmax.ignored_fraction, win ? "beats both" : "does not beat both");
    std::fflush(stdout);
  }
  report(7, beats_both >= 4,
         fmt("rl_e below static (%.2f) and random (%.2f) in %d/5 seeds; greedy %.2f", st.mean_variance,
             rnd.mean_variance, beats_both, greedy.mean_variance),
         eval_timer.seconds());

  Timer rerun_timer;
  ExperimentConfig again = default_experiment_config();
  again.seed = 1;
  again.output_dir = root / "seed1_rerun";
  finalize(again);
  std::ostringstream log;
  const TrainOutcome rerun = run_train(again, log);
  const std::string a = read_file(runs[0].metrics_csv);
  const std::string b = read_file(rerun.metrics_csv);
  report(9, !a.empty() && a == b,
         fmt("metrics.csv %zu vs %zu bytes, %s", a.size(), b.size(), a == b ? "identical" : "different"),
         rerun_timer.seconds());
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("replica_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  try {
    variance_oracle();
    safety_fuzz();
    codec_bijection();
    workload_fidelity();
    gradient_check();
    observation_shape();
    learning_and_ordering(root);
  } catch (const std::exception& e) {
    std::printf("acceptance suite aborted: %s\n", e.what());
    ++failures;
  }
  fs::remove_all(root);
  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "replica/cluster.hpp"
#include "replica/environment.hpp"
#include "replica/workload.hpp"

using namespace replica;

namespace {

ClusterConfig small_config() {
  ClusterConfig c;
  c.num_nodes = 3;
  c.num_blocks = 6;
  c.node_capacity = 5;
  c.max_replication = 3;
  c.initial_replication = 2;
  c.tau = 1.0;
  c.episode_length = 16;
  return c;
}

// Textbook two-pass population variance.
double two_pass_variance(const std::vector<std::int64_t>& loads) {
  double mean = 0.0;
  for (auto a : loads) mean += static_cast<double>(a);
  mean /= static_cast<double>(loads.size());
  double acc = 0.0;
  for (auto a : loads) acc += (static_cast<double>(a) - mean) * (static_cast<double>(a) - mean);
  return acc / static_cast<double>(loads.size());
}

}  // namespace

TEST_CASE("config validation") {
  ClusterConfig c = small_config();
  CHECK_NOTHROW(validate(c));
  c.num_nodes = 1;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = small_config();
  c.node_capacity = 1;  // 2 * 6 > 3 * 1
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = small_config();
  c.tau = 0.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = small_config();
  c.initial_replication = 4;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  // R_max above M is allowed; the binary placement caps replication at M anyway.
  c = small_config();
  c.max_replication = 5;
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("init_cluster places the initial replicas") {
  SUBCASE("single block on three of four nodes") {
    ClusterConfig c = small_config();
    c.num_nodes = 4;
    c.num_blocks = 1;
    c.initial_replication = 3;
    const ClusterState s = init_cluster(c, 7ULL);
    CHECK(s.replication(0) == 3);
  }
  SUBCASE("forced full placement") {
    ClusterConfig c = small_config();
    c.num_nodes = 3;
    c.num_blocks = 3;
    c.node_capacity = 3;
    c.initial_replication = 3;
    const ClusterState s = init_cluster(c, 1ULL);
    for (int b = 0; b < 3; ++b)
      for (int m = 0; m < 3; ++m) CHECK(s.holds(b, m));
  }
  SUBCASE("M=4, C=128, B=120 row and column sums") {
    ClusterConfig c;
    c.num_nodes = 4;
    c.num_blocks = 128;
    c.node_capacity = 120;
    const ClusterState s = init_cluster(c, 3ULL);
    int total = 0;
    for (int b = 0; b < 128; ++b) {
      CHECK(s.replication(b) == 3);
      total += s.replication(b);
    }
    CHECK(total == 384);
    for (int m = 0; m < 4; ++m) CHECK(s.node_fill(m) <= 120);
    CHECK_FALSE(find_invariant_violation(s, c).has_value());
    CHECK(s.step_index() == 0);
    CHECK(std::all_of(s.last_read_counts().begin(), s.last_read_counts().end(),
                      [](auto v) { return v == 0; }));
  }
  SUBCASE("tight capacity never dead-ends") {
    ClusterConfig c = small_config();
    c.num_nodes = 3;
    c.num_blocks = 3;
    c.node_capacity = 2;
    c.initial_replication = 2;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const ClusterState s = init_cluster(c, seed);
      CHECK_FALSE(find_invariant_violation(s, c).has_value());
    }
  }
  SUBCASE("deterministic given seed") {
    const ClusterConfig c = small_config();
    const ClusterState a = init_cluster(c, 11ULL);
    const ClusterState b = init_cluster(c, 11ULL);
    CHECK(std::equal(a.placement().begin(), a.placement().end(), b.placement().begin()));
  }
}

TEST_CASE("action codec") {
  // Enumeration oracle: walk kinds, from, to in nested order and count.
  for (int m = 2; m <= 6; ++m) {
    int index = 0;
    std::set<int> seen;
    for (int kind = 0; kind < 3; ++kind) {
      for (int from = 0; from < m; ++from) {
        for (int to = 0; to < m; ++to, ++index) {
          const Action a = decode_action(index, m);
          CHECK(static_cast<int>(a.kind) == kind);
          CHECK(a.from_node == from);
          CHECK(a.to_node == to);
          CHECK(encode_action(a, m) == index);
          seen.insert(encode_action(a, m));
        }
      }
    }
    CHECK(index == num_actions(m));
    CHECK(static_cast<int>(seen.size()) == num_actions(m));
  }
  CHECK(decode_action(0, 4) == Action{ActionKind::kCopy, 0, 0});
  CHECK(decode_action(17, 4) == Action{ActionKind::kRemove, 0, 1});
  CHECK(decode_action(47, 4) == Action{ActionKind::kMove, 3, 3});
  CHECK_THROWS_AS(decode_action(48, 4), std::out_of_range);
  CHECK_THROWS_AS(decode_action(-1, 4), std::out_of_range);
}

TEST_CASE("select_block picks the hottest block, smallest id on ties") {
  ClusterState s(2, 8);
  s.add_replica(5, 0);
  s.add_replica(2, 0);
  s.add_replica(7, 0);
  s.set_read_count(0, 5, 9);
  s.set_read_count(0, 2, 9);
  s.set_read_count(0, 7, 3);
  CHECK(select_block(s, 0) == 2);
  CHECK_FALSE(select_block(s, 1).has_value());

  ClusterState z(2, 2);
  z.add_replica(0, 0);
  z.add_replica(1, 0);
  CHECK(select_block(z, 0) == 0);
}

TEST_CASE("apply_action rules") {
  ClusterConfig c = small_config();
  c.num_nodes = 6;
  c.num_blocks = 2;
  c.max_replication = 5;
  c.node_capacity = 2;

  auto fresh = [] {
    ClusterState s(6, 2);
    return s;
  };

  SUBCASE("copy at max replication is ignored") {
    ClusterState s = fresh();
    for (int m = 0; m < 5; ++m) s.add_replica(0, m);
    s.add_replica(1, 5);
    const std::vector<std::uint8_t> before(s.placement().begin(), s.placement().end());
    CHECK_FALSE(apply_action(s, c, {ActionKind::kCopy, 0, 5}));
    CHECK(std::equal(before.begin(), before.end(), s.placement().begin()));
  }
  SUBCASE("remove of the last replica is ignored") {
    ClusterState s = fresh();
    s.add_replica(0, 0);
    s.add_replica(1, 1);
    CHECK_FALSE(apply_action(s, c, {ActionKind::kRemove, 0, 3}));
    CHECK(s.replication(0) == 1);
  }
  SUBCASE("remove drops the hottest replica and ignores to_node") {
    ClusterState s = fresh();
    s.add_replica(0, 0);
    s.add_replica(0, 1);
    s.add_replica(1, 0);
    s.add_replica(1, 2);
    s.set_read_count(0, 1, 4);
    CHECK(apply_action(s, c, {ActionKind::kRemove, 0, 0}));
    CHECK_FALSE(s.holds(1, 0));
    CHECK(s.replication(1) == 1);
    CHECK(s.read_count(0, 1) == 0);
  }
  SUBCASE("remove is ignored when erase is disabled") {
    ClusterConfig ne = c;
    ne.allow_erase = false;
    ClusterState s = fresh();
    s.add_replica(0, 0);
    s.add_replica(0, 1);
    CHECK_FALSE(apply_action(s, ne, {ActionKind::kRemove, 0, 1}));
    CHECK(s.replication(0) == 2);
  }
  SUBCASE("move relocates without changing replication") {
    ClusterState s = fresh();
    s.add_replica(0, 0);
    s.add_replica(0, 2);
    CHECK(apply_action(s, c, {ActionKind::kMove, 0, 1}));
    CHECK_FALSE(s.holds(0, 0));
    CHECK(s.holds(0, 1));
    CHECK(s.replication(0) == 2);
  }
  SUBCASE("ignored: empty from-node, target holds block, target full, move onto itself") {
    ClusterState s = fresh();
    s.add_replica(0, 0);
    s.add_replica(0, 1);
    s.add_replica(1, 1);
    s.add_replica(1, 2);
    s.add_replica(0, 2);  // node 2 now full (capacity 2)
    CHECK_FALSE(apply_action(s, c, {ActionKind::kCopy, 4, 0}));   // node 4 empty
    CHECK_FALSE(apply_action(s, c, {ActionKind::kCopy, 0, 1}));   // node 1 has block 0
    s.set_read_count(1, 1, 5);
    CHECK_FALSE(apply_action(s, c, {ActionKind::kCopy, 1, 2}));   // node 2 has block 1 and is full
    CHECK_FALSE(apply_action(s, c, {ActionKind::kMove, 0, 0}));
    s.set_read_count(0, 0, 1);
    CHECK(apply_action(s, c, {ActionKind::kCopy, 0, 3}));
  }
}

TEST_CASE("serve_requests") {
  ClusterState s(2, 2);
  s.add_replica(0, 1);
  s.add_replica(1, 0);
  s.add_replica(1, 1);
  Rng rng = make_rng(5, Stream::kServe);

  SUBCASE("single replica takes every read") {
    const std::vector<int> req(10, 0);
    const ServeResult r = serve_requests(s, req, rng);
    CHECK(r.load_vector == std::vector<std::int64_t>{0, 10});
    CHECK(r.read_counts[1 * 2 + 0] == 10);
  }
  SUBCASE("two replicas split evenly within 6 sigma") {
    const std::vector<int> req(10000, 1);
    const ServeResult r = serve_requests(s, req, rng);
    CHECK(r.load_vector[0] + r.load_vector[1] == 10000);
    CHECK(std::abs(r.load_vector[0] - 5000) <= 300);
  }
  SUBCASE("empty batch") {
    const ServeResult r = serve_requests(s, {}, rng);
    CHECK(r.load_vector == std::vector<std::int64_t>{0, 0});
  }
  SUBCASE("unknown block") {
    const std::vector<int> req{2};
    CHECK_THROWS_AS(serve_requests(s, req, rng), std::out_of_range);
  }
}

TEST_CASE("compute_reward") {
  CHECK(compute_reward(std::vector<std::int64_t>{2, 2, 2, 2}, 3.0) == 0.0);
  CHECK(compute_reward(std::vector<std::int64_t>{4, 0}, 1.0) == doctest::Approx(-4.0));
  CHECK(compute_reward(std::vector<std::int64_t>{200, 0, 0, 0}, 0.0004) == doctest::Approx(-3.0));
  CHECK(default_tau(4, 200.0) == doctest::Approx(0.0004));

  Rng rng(42);
  std::uniform_int_distribution<int> size(2, 16), load(0, 1000);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::int64_t> loads(size(rng));
    for (auto& a : loads) a = load(rng);
    const double reward = compute_reward(loads, 1.0);
    const double oracle = -two_pass_variance(loads);
    CHECK(reward <= 0.0);
    CHECK(std::abs(reward - oracle) <= 1e-9 * std::max(1.0, std::abs(oracle)));
    const bool all_equal = std::all_of(loads.begin(), loads.end(), [&](auto a) { return a == loads[0]; });
    CHECK((reward == 0.0) == all_equal);

    const int k = trial % 5;
    std::vector<std::int64_t> scaled(loads);
    for (auto& a : scaled) a *= k;
    CHECK(compute_reward(scaled, 1.0) == doctest::Approx(k * k * reward).epsilon(1e-12));
  }
}

TEST_CASE("step follows act-then-read order") {
  const ClusterConfig c = small_config();
  WorkloadConfig wc;
  wc.num_blocks = c.num_blocks;
  wc.poisson_mean = 20;
  ReplicationEnv env(c, wc, 9);
  const std::vector<std::uint8_t> initial(env.state().placement().begin(), env.state().placement().end());

  // Move(0 -> 0) is never applied.
  const int no_op = encode_action({ActionKind::kMove, 0, 0}, c.num_nodes);
  for (int t = 0; t < c.episode_length; ++t) {
    CHECK_FALSE(env.episode_done());
    const StepResult r = env.step(no_op);
    CHECK_FALSE(r.action_applied);
    CHECK(r.reward == compute_reward(r.load_vector, c.tau));
    CHECK(std::accumulate(r.load_vector.begin(), r.load_vector.end(), std::int64_t{0}) ==
          r.requests_served);
    CHECK(std::equal(r.raw_read_counts.begin(), r.raw_read_counts.end(),
                     env.state().last_read_counts().begin()));
  }
  CHECK(env.episode_done());
  CHECK(env.state().step_index() == c.episode_length);
  CHECK(std::equal(initial.begin(), initial.end(), env.state().placement().begin()));
  CHECK_THROWS_AS(env.step(num_actions(c.num_nodes)), std::out_of_range);
}

TEST_CASE("random action fuzz keeps invariants") {
  const ClusterConfig c = small_config();
  WorkloadConfig wc;
  wc.num_blocks = c.num_blocks;
  wc.poisson_mean = 15;
  ReplicationEnv env(c, wc, 21);
  Rng rng(3);
  std::uniform_int_distribution<int> pick(0, num_actions(c.num_nodes) - 1);
  for (int t = 0; t < 20000; ++t) {
    const std::vector<std::uint8_t> before(env.state().placement().begin(), env.state().placement().end());
    const StepResult r = env.step(pick(rng));
    if (!r.action_applied) {
      REQUIRE(std::equal(before.begin(), before.end(), env.state().placement().begin()));
    }
    const auto violation = find_invariant_violation(env.state(), c);
    REQUIRE_MESSAGE(!violation, *violation);
    if (env.episode_done()) env.reset();
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "crca/analytics.hpp"
#include "crca/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

using namespace crca;

namespace {

AvailabilityModel constant_model(int m, int n, double p) {
  return {m, n, Matrix::Constant(m, n, p)};
}

AvailabilityModel random_model(int m, int n, double low, double high, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(low, high);
  Matrix p(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = dist(rng);
  return {m, n, p};
}

double total_throughput(const AvailabilityModel& model, const Assignment& as, double delta) {
  double sum = 0.0;
  for (int i = 0; i < model.num_users; ++i)
    sum += user_throughput_perfect(model, as, i, delta);
  return sum;
}

double min_throughput(const AvailabilityModel& model, const Assignment& as, double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < model.num_users; ++i)
    best = std::min(best, user_throughput_perfect(model, as, i, delta));
  return best;
}

bool covers_all_channels(const Assignment& as, int n) {
  std::set<int> seen;
  for (const auto& s : as.exclusive) seen.insert(s.begin(), s.end());
  for (const auto& s : as.shared) seen.insert(s.begin(), s.end());
  return static_cast<int>(seen.size()) == n;
}

}  // namespace

TEST_CASE("greedy split: a single user collects every channel") {
  const auto model = random_model(1, 5, 0.2, 0.9, 7);
  const auto as = greedy_nonoverlap(model);
  CHECK(as.exclusive[0] == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(as.shared[0].empty());
}

TEST_CASE("greedy split: each user gets its best channel first") {
  AvailabilityModel model{2, 2, Matrix(2, 2)};
  model.p << 0.9, 0.5, 0.6, 0.8;
  const auto as = greedy_nonoverlap(model);
  CHECK(as.exclusive[0] == std::vector<int>{0});
  CHECK(as.exclusive[1] == std::vector<int>{1});
}

TEST_CASE("greedy split covers every channel exactly once") {
  const auto model = random_model(3, 7, 0.1, 0.95, 11);
  const auto as = greedy_nonoverlap(model);
  validate_assignment(model, as);
  CHECK(covers_all_channels(as, 7));
  int assigned = 0;
  for (const auto& s : as.exclusive) assigned += static_cast<int>(s.size());
  CHECK(assigned == 7);
}

TEST_CASE("greedy split is deterministic") {
  const auto model = random_model(4, 9, 0.3, 0.9, 3);
  const auto a = greedy_nonoverlap(model);
  const auto b = greedy_nonoverlap(model);
  CHECK(a.exclusive == b.exclusive);
}

TEST_CASE("greedy split beats round robin on abundant channels") {
  // flat high availability with many channels per user: every user should
  // end up close to saturation
  const auto model = constant_model(3, 12, 0.85);
  const auto as = greedy_nonoverlap(model);
  for (int i = 0; i < 3; ++i)
    CHECK(user_throughput_perfect(model, as, i, 0.0) > 1.0 - std::pow(0.15, 4) - 1e-12);
}

TEST_CASE("overlap search with a prohibitive gain floor reduces to the split") {
  const auto model = random_model(3, 6, 0.3, 0.9, 5);
  GreedyConfig config;
  config.epsilon = 1.0;  // no estimated gain can reach 1
  const auto result = greedy_overlap(model, paper2012_timing(), config);
  const auto split = greedy_nonoverlap(model);
  CHECK(result.assignment.exclusive == split.exclusive);
  CHECK(result.grants == 0);
  for (const auto& s : result.assignment.shared) CHECK(s.empty());
}

TEST_CASE("overlap search only helps: total throughput never drops") {
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto model = random_model(3, 4, 0.7, 0.95, seed);
    const auto result = greedy_overlap(model, paper2012_timing());
    validate_assignment(model, result.assignment);
    const auto split = greedy_nonoverlap(model);
    const double with = total_throughput(model, result.assignment, result.delta);
    const double without = total_throughput(model, split, 0.0);
    // sharing trades overhead for access; the committed result must not be
    // worse than the split by more than the gain floor per grant
    CHECK(with >= without - result.grants * GreedyConfig{}.epsilon - 1e-9);
  }
}

TEST_CASE("overlap grants improve the flat tight-channel case") {
  const auto model = constant_model(3, 4, 0.8);
  const auto result = greedy_overlap(model, paper2012_timing());
  CHECK(result.grants > 0);
  const auto split = greedy_nonoverlap(model);
  CHECK(total_throughput(model, result.assignment, result.delta) >
        total_throughput(model, split, 0.0) - 1e-12);
}

TEST_CASE("overlap search leaves every user at least one exclusive channel") {
  for (unsigned seed : {10u, 20u, 30u}) {
    const auto model = random_model(3, 6, 0.75, 0.95, seed);
    const auto result = greedy_overlap(model, paper2012_timing());
    for (const auto& s : result.assignment.exclusive) CHECK(!s.empty());
  }
}

TEST_CASE("overlap search scan size is bounded by users times channels") {
  const auto model = constant_model(3, 6, 0.85);
  const auto result = greedy_overlap(model, paper2012_timing());
  CHECK(result.max_scan_evaluations <= 3 * 6);
  CHECK(result.rescans >= 0);
}

TEST_CASE("overlap result reports the window and overhead of the final assignment") {
  const auto model = constant_model(3, 4, 0.8);
  const auto result = greedy_overlap(model, paper2012_timing());
  CHECK(result.window ==
        select_window(model, result.assignment, paper2012_timing()));
  CHECK(result.delta == doctest::Approx(mac_overhead(paper2012_timing(), result.window)));
}

TEST_CASE("fair split: two users, two channels, flat availability") {
  const auto model = constant_model(2, 2, 0.8);
  const auto as = fair_nonoverlap(model);
  CHECK(as.exclusive[0].size() == 1);
  CHECK(as.exclusive[1].size() == 1);
  CHECK(covers_all_channels(as, 2));
}

TEST_CASE("fair split favors the worst-off user") {
  AvailabilityModel model{2, 3, Matrix(2, 3)};
  model.p << 0.9, 0.9, 0.5, 0.6, 0.6, 0.6;
  const auto as = fair_nonoverlap(model);
  // user 1 (weaker everywhere) gets two channels, user 0 one
  CHECK(as.exclusive[0] == std::vector<int>{0});
  CHECK(as.exclusive[1] == std::vector<int>{1, 2});
}

TEST_CASE("fair split with one user takes everything") {
  const auto model = random_model(1, 4, 0.2, 0.9, 13);
  const auto as = fair_nonoverlap(model);
  CHECK(as.exclusive[0] == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("fair overlap never lowers the minimum throughput") {
  AvailabilityModel model{2, 2, Matrix(2, 2)};
  model.p << 0.9, 0.9, 0.5, 0.5;
  const auto base = fair_nonoverlap(model);
  const auto as = fair_overlap(model, paper2012_timing());
  validate_assignment(model, as);
  const auto report = network_throughput_best_effort(model, as, paper2012_timing());
  double min_shared = *std::min_element(report.per_user.begin(), report.per_user.end());
  CHECK(min_shared >= min_throughput(model, base, 0.0) - 1e-12);
}

TEST_CASE("fair overlap on random instances keeps a valid assignment") {
  for (unsigned seed : {40u, 41u, 42u}) {
    const auto model = random_model(3, 5, 0.7, 0.95, seed);
    const auto as = fair_overlap(model, paper2012_timing());
    validate_assignment(model, as);
    CHECK(covers_all_channels(as, 5));
  }
}

TEST_CASE("improvement scan returns nothing when no move helps") {
  // both users already saturated on their own strong channels, the scan on
  // behalf of user 0 cannot beat its current throughput
  AvailabilityModel model{2, 2, Matrix(2, 2)};
  model.p << 0.99, 0.01, 0.01, 0.99;
  Assignment as;
  as.exclusive = {{0}, {1}};
  as.shared = {{}, {}};
  const double t0 = user_throughput_perfect(model, as, 0, 0.0);
  CHECK_FALSE(search_potential(model, as, 0, t0, 0.2).has_value());
}

TEST_CASE("improvement scan can share a rival's exclusive channel") {
  AvailabilityModel model{2, 2, Matrix(2, 2)};
  model.p << 0.9, 0.9, 0.5, 0.5;
  Assignment as;
  as.exclusive = {{0}, {1}};
  as.shared = {{}, {}};
  const double t_min = user_throughput_perfect(model, as, 1, 0.0);
  const auto found = search_potential(model, as, 1, t_min, 0.06);
  REQUIRE(found.has_value());
  validate_assignment(model, *found);
  double new_min = std::min(user_throughput_perfect(model, *found, 0, 0.06),
                            user_throughput_perfect(model, *found, 1, 0.06));
  CHECK(new_min > t_min);
}

TEST_CASE("exhaustive search: one user is granted all channels") {
  const auto model = random_model(1, 2, 0.3, 0.9, 17);
  const auto result = brute_force_optimal(model, paper2012_timing(),
                                          ObjectiveKind::SumThroughput);
  CHECK(result.assignment.exclusive[0] == std::vector<int>{0, 1});
  CHECK(result.value == doctest::Approx(1.0 - model.busy(0, 0) * model.busy(0, 1)));
}

TEST_CASE("exhaustive search picks the obvious diagonal matching") {
  AvailabilityModel model{2, 2, Matrix(2, 2)};
  model.p << 0.9, 0.1, 0.1, 0.9;
  const auto result = brute_force_optimal(model, paper2012_timing(),
                                          ObjectiveKind::SumThroughput);
  CHECK(result.assignment.exclusive[0] == std::vector<int>{0});
  CHECK(result.assignment.exclusive[1] == std::vector<int>{1});
  CHECK(result.value == doctest::Approx(1.8));
}

TEST_CASE("exhaustive search dominates both greedy algorithms") {
  for (unsigned seed : {50u, 51u, 52u, 53u}) {
    const auto model = random_model(2, 4, 0.5, 0.95, seed);
    const auto timing = paper2012_timing();

    const auto best_sum = brute_force_optimal(model, timing, ObjectiveKind::SumThroughput);
    const auto greedy = greedy_overlap(model, timing);
    CHECK(best_sum.value >=
          total_throughput(model, greedy.assignment, greedy.delta) - 1e-9);

    const auto best_min = brute_force_optimal(model, timing, ObjectiveKind::MaxMin);
    const auto fair = fair_overlap(model, timing);
    const auto fair_report = network_throughput_best_effort(model, fair, timing);
    CHECK(best_min.value >=
          *std::min_element(fair_report.per_user.begin(), fair_report.per_user.end()) - 1e-9);
  }
}

TEST_CASE("exhaustive search rejects oversized instances") {
  const auto model = constant_model(4, 5, 0.8);
  CHECK_THROWS_AS(
      brute_force_optimal(model, paper2012_timing(), ObjectiveKind::SumThroughput),
      CapExceeded);
}

TEST_CASE("round robin split and shared variants") {
  const auto model = constant_model(3, 6, 0.8);
  const auto split = round_robin(model, 1);
  CHECK(split.exclusive[0] == std::vector<int>{0, 3});
  CHECK(split.exclusive[1] == std::vector<int>{1, 4});
  CHECK(split.exclusive[2] == std::vector<int>{2, 5});
  for (const auto& s : split.shared) CHECK(s.empty());

  const auto pooled = round_robin(model, 5);  // share count clamps at M
  for (const auto& s : pooled.exclusive) CHECK(s.empty());
  for (const auto& s : pooled.shared)
    CHECK(s == std::vector<int>{0, 1, 2, 3, 4, 5});
  validate_assignment(model, pooled);
}

TEST_CASE("round robin ignores the availability values") {
  const auto a = round_robin(constant_model(3, 5, 0.2), 2);
  const auto b = round_robin(random_model(3, 5, 0.3, 0.9, 99), 2);
  CHECK(a.exclusive == b.exclusive);
  CHECK(a.shared == b.shared);
}

#include "crca/assignment.hpp"

#include "crca/analytics.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace crca {

namespace {

void sorted_insert(std::vector<int>& v, int x) {
  v.insert(std::lower_bound(v.begin(), v.end(), x), x);
}

void sorted_erase(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

// Visits all size-l subsets of `pool` in lexicographic order.
template <class Fn>
void for_each_subset(const std::vector<int>& pool, int l, Fn&& fn) {
  const int n = static_cast<int>(pool.size());
  if (l > n) return;
  std::vector<int> idx(l);
  for (int t = 0; t < l; ++t) idx[t] = t;
  std::vector<int> subset(l);
  while (true) {
    for (int t = 0; t < l; ++t) subset[t] = pool[idx[t]];
    fn(subset);
    int t = l - 1;
    while (t >= 0 && idx[t] == n - l + t) --t;
    if (t < 0) break;
    ++idx[t];
    for (int u = t + 1; u < l; ++u) idx[u] = idx[u - 1] + 1;
  }
}

double min_throughput(const AvailabilityModel& model, const Assignment& assignment,
                      double delta, int* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < assignment.num_users(); ++i) {
    const double t = user_throughput_perfect(model, assignment, i, delta);
    if (t < best) {
      best = t;
      if (argmin) *argmin = i;
    }
  }
  return best;
}

}  // namespace

Assignment greedy_nonoverlap(const AvailabilityModel& model) {
  const int m = model.num_users;
  Assignment as = Assignment::empty(m);
  std::vector<int> pool(model.num_channels);
  for (int j = 0; j < model.num_channels; ++j) pool[j] = j;

  while (!pool.empty()) {
    int best_user = -1, best_channel = -1;
    double best_gain = -1.0;
    for (int i = 0; i < m; ++i) {
      int ji = pool.front();
      for (int j : pool)
        if (model.idle(i, j) > model.idle(i, ji)) ji = j;
      const double gain = marginal_gain_nonoverlap(model, as.exclusive[i], i, ji);
      if (gain > best_gain) {
        best_gain = gain;
        best_user = i;
        best_channel = ji;
      }
    }
    sorted_insert(as.exclusive[best_user], best_channel);
    sorted_erase(pool, best_channel);
  }
  return as;
}

OverlapResult greedy_overlap(const AvailabilityModel& model, const MacTiming& timing,
                             const GreedyConfig& config) {
  const int m = model.num_users;
  OverlapResult result;
  result.assignment = greedy_nonoverlap(model);
  Assignment& as = result.assignment;

  int window = select_window(model, as, timing);
  double delta0 = mac_overhead(timing, window);
  bool updoverhead = false;

  for (int h = 1; h <= m - 1; ++h) {
    // Channels infeasible to grant at the current assignment; cleared when
    // the assignment changes.
    std::set<std::pair<int, int>> skipped;
    while (true) {
      const auto views = derive_views(as, model.num_channels);
      int best_user = -1, best_channel = -1;
      double best_gain = -std::numeric_limits<double>::infinity();
      int evaluations = 0;
      for (int j = 0; j < model.num_channels; ++j) {
        const auto& holders = views.sharers[j];
        if (static_cast<int>(holders.size()) != h) continue;
        // Converting an owner's last exclusive channel to shared is not
        // allowed: every user keeps one guaranteed channel.
        if (h == 1 && as.exclusive[views.owner[j]].size() <= 1) continue;
        int ch_user = -1;
        double ch_gain = -std::numeric_limits<double>::infinity();
        for (int l = 0; l < m; ++l) {
          if (std::binary_search(holders.begin(), holders.end(), l)) continue;
          if (skipped.count({j, l})) continue;
          const double gain = estimate_overlap_gain(model, as, l, j, holders, delta0);
          ++evaluations;
          if (gain > ch_gain) {
            ch_gain = gain;
            ch_user = l;
          }
        }
        if (ch_user >= 0 && ch_gain > best_gain) {
          best_gain = ch_gain;
          best_user = ch_user;
          best_channel = j;
        }
      }
      result.max_scan_evaluations = std::max(result.max_scan_evaluations, evaluations);

      if (best_user < 0 || best_gain <= config.epsilon) {
        if (updoverhead) {
          // delta0 may reflect an uncommitted tentative grant; pin the
          // returned pair to the committed assignment.
          result.window = select_window(model, as, timing);
          result.delta = mac_overhead(timing, result.window);
          return result;
        }
        break;  // nothing acceptable at this sharing level; widen it
      }

      Assignment tentative = as;
      if (h == 1) {
        const int owner = views.owner[best_channel];
        sorted_erase(tentative.exclusive[owner], best_channel);
        sorted_insert(tentative.shared[owner], best_channel);
      }
      sorted_insert(tentative.shared[best_user], best_channel);

      int w_new;
      double delta_new;
      try {
        w_new = select_window(model, tentative, timing);
        delta_new = mac_overhead(timing, w_new);
      } catch (const WindowCapExceeded&) {
        skipped.insert({best_channel, best_user});
        continue;
      } catch (const ValidationError&) {
        skipped.insert({best_channel, best_user});
        continue;
      }

      if (std::abs(delta_new - delta0) > config.epsilon_delta) {
        // Overhead drifted: re-estimate the whole scan before committing.
        delta0 = delta_new;
        updoverhead = true;
        ++result.rescans;
        continue;
      }
      as = std::move(tentative);
      window = w_new;
      delta0 = delta_new;
      updoverhead = false;
      ++result.grants;
      skipped.clear();
    }
  }
  result.window = select_window(model, as, timing);
  result.delta = mac_overhead(timing, result.window);
  return result;
}

Assignment fair_nonoverlap(const AvailabilityModel& model) {
  const int m = model.num_users;
  Assignment as = Assignment::empty(m);
  std::vector<int> pool(model.num_channels);
  for (int j = 0; j < model.num_channels; ++j) pool[j] = j;
  std::vector<double> t(m, 0.0);

  while (!pool.empty()) {
    const double t_min = *std::min_element(t.begin(), t.end());
    int best_user = -1, best_channel = -1;
    double best_gain = -1.0;
    for (int i = 0; i < m; ++i) {
      if (t[i] != t_min) continue;
      for (int j : pool) {
        const double gain = marginal_gain_nonoverlap(model, as.exclusive[i], i, j);
        if (gain > best_gain) {
          best_gain = gain;
          best_user = i;
          best_channel = j;
        }
      }
    }
    sorted_insert(as.exclusive[best_user], best_channel);
    sorted_erase(pool, best_channel);
    t[best_user] = user_throughput_nonoverlap(model, as.exclusive[best_user], best_user);
  }
  return as;
}

std::optional<Assignment> search_potential(const AvailabilityModel& model,
                                           const Assignment& assignment, int user,
                                           double t_min, double delta) {
  const int m = model.num_users;
  const auto views = derive_views(assignment, model.num_channels);
  std::optional<Assignment> best;
  double best_min = t_min;

  auto consider = [&](const Assignment& candidate, const std::vector<int>& affected) {
    double lo = std::numeric_limits<double>::infinity();
    for (int i : affected)
      lo = std::min(lo, user_throughput_perfect(model, candidate, i, delta));
    if (lo > best_min) {
      best_min = lo;
      best = candidate;
    }
  };

  // Channels currently exclusive to someone else: convert to shared between
  // the owner, `user`, and any subset of up to M-2 further joiners.
  for (int j = 0; j < model.num_channels; ++j) {
    const int owner = views.owner[j];
    if (owner < 0 || owner == user) continue;
    std::vector<int> others;
    for (int i = 0; i < m; ++i)
      if (i != user && i != owner) others.push_back(i);
    for (int l = 0; l <= std::max(0, m - 2); ++l) {
      for_each_subset(others, l, [&](const std::vector<int>& joiners) {
        Assignment candidate = assignment;
        sorted_erase(candidate.exclusive[owner], j);
        sorted_insert(candidate.shared[owner], j);
        sorted_insert(candidate.shared[user], j);
        for (int i : joiners) sorted_insert(candidate.shared[i], j);
        std::vector<int> affected = {user, owner};
        affected.insert(affected.end(), joiners.begin(), joiners.end());
        consider(candidate, affected);
      });
    }
  }

  // Channels already shared by others but not by `user`: join, optionally
  // with further new sharers.
  for (int j = 0; j < model.num_channels; ++j) {
    const auto& holders = views.sharers[j];
    if (holders.size() < 2) continue;
    if (std::binary_search(holders.begin(), holders.end(), user)) continue;
    std::vector<int> others;
    for (int i = 0; i < m; ++i)
      if (i != user && !std::binary_search(holders.begin(), holders.end(), i))
        others.push_back(i);
    for (int l = 0; l <= static_cast<int>(others.size()); ++l) {
      for_each_subset(others, l, [&](const std::vector<int>& joiners) {
        Assignment candidate = assignment;
        sorted_insert(candidate.shared[user], j);
        for (int i : joiners) sorted_insert(candidate.shared[i], j);
        std::vector<int> affected = {user};
        affected.insert(affected.end(), holders.begin(), holders.end());
        affected.insert(affected.end(), joiners.begin(), joiners.end());
        consider(candidate, affected);
      });
    }
  }
  return best;
}

Assignment fair_overlap(const AvailabilityModel& model, const MacTiming& timing,
                        const GreedyConfig&) {
  Assignment as = fair_nonoverlap(model);
  int window = select_window(model, as, timing);
  double delta = mac_overhead(timing, window);

  while (true) {
    int worst = 0;
    const double t_min = min_throughput(model, as, delta, &worst);
    const auto candidate = search_potential(model, as, worst, t_min, delta);
    if (!candidate) break;

    // The scan estimates with the current overhead; the candidate only
    // counts if it still beats the old minimum under its own window.
    int w_new;
    double delta_new;
    try {
      w_new = select_window(model, *candidate, timing);
      delta_new = mac_overhead(timing, w_new);
    } catch (const WindowCapExceeded&) {
      break;
    } catch (const ValidationError&) {
      break;
    }
    if (min_throughput(model, *candidate, delta_new) <= t_min) break;
    as = *candidate;
    window = w_new;
    delta = delta_new;
  }
  return as;
}

BruteForceResult brute_force_optimal(const AvailabilityModel& model, const MacTiming& timing,
                                     ObjectiveKind objective, int cap) {
  const int m = model.num_users;
  const int n = model.num_channels;
  if (m * n > cap)
    throw CapExceeded("exhaustive search needs 2^" + std::to_string(m * n) +
                      " candidates; cap is 2^" + std::to_string(cap));

  const int masks = 1 << m;
  std::vector<int> digit(n, 0);
  BruteForceResult best;
  best.value = -std::numeric_limits<double>::infinity();
  bool found = false;

  Assignment as = Assignment::empty(m);
  while (true) {
    for (auto& v : as.exclusive) v.clear();
    for (auto& v : as.shared) v.clear();
    for (int j = 0; j < n; ++j) {
      const int mask = digit[j];
      const int holders = __builtin_popcount(static_cast<unsigned>(mask));
      for (int i = 0; i < m; ++i)
        if (mask & (1 << i)) {
          if (holders == 1)
            as.exclusive[i].push_back(j);
          else
            as.shared[i].push_back(j);
        }
    }
    try {
      const ThroughputReport report = network_throughput(model, as, timing);
      double value = report.total;
      if (objective == ObjectiveKind::MaxMin)
        value = *std::min_element(report.per_user.begin(), report.per_user.end());
      if (value > best.value) {
        best.value = value;
        best.assignment = as;
        best.window = report.window;
        best.delta = report.overhead;
        found = true;
      }
    } catch (const WindowCapExceeded&) {
    } catch (const ValidationError&) {
    }
    int j = 0;
    while (j < n && ++digit[j] == masks) digit[j++] = 0;
    if (j == n) break;
  }
  if (!found)
    throw WindowCapExceeded("no feasible candidate in the exhaustive search");
  return best;
}

Assignment round_robin(const AvailabilityModel& model, int k_share) {
  if (k_share < 1) throw ValidationError("k_share must be >= 1");
  const int m = model.num_users;
  Assignment as = Assignment::empty(m);
  const int holders = std::min(k_share, m);
  for (int j = 0; j < model.num_channels; ++j)
    for (int t = 0; t < holders; ++t) {
      const int i = (j + t) % m;
      if (holders == 1)
        sorted_insert(as.exclusive[i], j);
      else
        sorted_insert(as.shared[i], j);
    }
  return as;
}

}  // namespace crca

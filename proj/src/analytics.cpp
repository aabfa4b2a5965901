#include "crca/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace crca {

namespace {

double comb(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
  return r;
}

double prod_busy(const AvailabilityModel& model, int user, const std::vector<int>& channels) {
  double r = 1.0;
  for (int j : channels) r *= model.busy(user, j);
  return r;
}

// Probabilities that the listed channels are all "busy" / the idle-count
// distribution, under an arbitrary per-channel idle probability source.
template <class IdleFn>
std::vector<double> idle_probs_excluding(const std::vector<int>& channels, int skip,
                                         int user, IdleFn&& idle) {
  std::vector<double> probs;
  probs.reserve(channels.size());
  for (int h : channels)
    if (h != skip) probs.push_back(idle(user, h));
  return probs;
}

// Expected share of one contention slot for `user` on shared channel
// `channel`: each co-sharer independently falls into one of four behaviors
// (has exclusive access elsewhere / sees the channel busy / contends on a
// different shared channel / competes here), and the user wins against a
// competitors with probability 1/(1+a). Exact via a count DP over the
// number of competitors.
template <class IdleFn>
double contention_share(const AvailabilityModel& model, const Assignment& assignment,
                        const DerivedViews& views, int user, int channel, IdleFn&& idle) {
  std::vector<double> dist{1.0};  // Pr{a competitors so far}
  for (int m : views.sharers[channel]) {
    if (m == user) continue;
    double idle_here = idle(m, channel);
    double all_excl_busy = 1.0;
    for (int h : assignment.exclusive[m]) all_excl_busy *= 1.0 - idle(m, h);
    double base = idle_here * all_excl_busy;  // m would contend, and this channel qualifies
    double inv = expected_inv_one_plus(
        idle_probs_excluding(assignment.shared[m], channel, m, idle));
    double competes = base * inv;  // m picks this channel among its candidates
    double elsewhere = 1.0 - competes;
    std::vector<double> next(dist.size() + 1, 0.0);
    for (std::size_t a = 0; a < dist.size(); ++a) {
      next[a] += dist[a] * elsewhere;
      next[a + 1] += dist[a] * competes;
    }
    dist = std::move(next);
  }
  double share = 0.0;
  for (std::size_t a = 0; a < dist.size(); ++a) share += dist[a] / (1.0 + a);
  return share;
}

}  // namespace

std::vector<double> count_distribution(const std::vector<double>& probs) {
  std::vector<double> dist(probs.size() + 1, 0.0);
  dist[0] = 1.0;
  int n = 0;
  for (double p : probs) {
    ++n;
    for (int k = n; k >= 1; --k) dist[k] = dist[k] * (1.0 - p) + dist[k - 1] * p;
    dist[0] *= 1.0 - p;
  }
  return dist;
}

double expected_inv_one_plus(const std::vector<double>& probs) {
  const auto dist = count_distribution(probs);
  double r = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) r += dist[k] / (1.0 + k);
  return r;
}

double user_throughput_nonoverlap(const AvailabilityModel& model,
                                  const std::vector<int>& channels, int user) {
  if (channels.empty()) return 0.0;
  return 1.0 - prod_busy(model, user, channels);
}

double marginal_gain_nonoverlap(const AvailabilityModel& model,
                                const std::vector<int>& channels, int user, int candidate) {
  return model.idle(user, candidate) * prod_busy(model, user, channels);
}

double estimate_overlap_gain(const AvailabilityModel& model, const Assignment& assignment,
                             int user, int channel, const std::vector<int>& sharers,
                             double delta) {
  const int ms = static_cast<int>(sharers.size());
  if (ms < 1) return 0.0;
  const double pij = model.idle(user, channel);
  const double excl_busy = prod_busy(model, user, assignment.exclusive[user]);
  const double com_busy = prod_busy(model, user, assignment.shared[user]);
  const double split = (1.0 - 1.0 / ms) * (1.0 - delta);

  // One sharer misses the channel, everyone else (incl. the new user) sees
  // it idle; the new user escapes sharing a common channel with them.
  double one_out = 0.0;
  for (int k = 0; k < ms; ++k) {
    double term = model.busy(sharers[k], channel);
    for (int q = 0; q < ms; ++q)
      if (q != k) term *= model.idle(sharers[q], channel);
    one_out += term;
  }
  const double t1 = split * pij * excl_busy * (1.0 - com_busy) * one_out;

  // Every sharer sees the channel idle but is drawn away by an idle channel
  // in its own exclusive set.
  double all_idle_drawn = 1.0;
  for (int q : sharers)
    all_idle_drawn *= model.idle(q, channel) *
                      (1.0 - prod_busy(model, q, assignment.exclusive[q]));
  const double t2 = (1.0 - delta) * pij * excl_busy * com_busy * all_idle_drawn;
  const double t3 = split * pij * excl_busy * (1.0 - com_busy) * all_idle_drawn;
  return t1 + t2 + t3;
}

double contend_probability(const AvailabilityModel& model, const Assignment& assignment,
                           int user) {
  const double excl_busy = prod_busy(model, user, assignment.exclusive[user]);
  const double com_busy = prod_busy(model, user, assignment.shared[user]);
  return excl_busy * (1.0 - com_busy);
}

ContentionProfile contention_profile(const AvailabilityModel& model,
                                     const Assignment& assignment) {
  ContentionProfile profile;
  profile.contend.resize(assignment.num_users());
  for (int i = 0; i < assignment.num_users(); ++i)
    profile.contend[i] = contend_probability(model, assignment, i);
  profile.count_dist = count_distribution(profile.contend);
  return profile;
}

std::vector<double> contenders_distribution(const AvailabilityModel& model,
                                            const Assignment& assignment) {
  return contention_profile(model, assignment).count_dist;
}

double collision_prob_given_m(int window, int contenders) {
  if (contenders < 2) return 0.0;
  static std::mutex mu;
  static std::unordered_map<long long, double> cache;
  const long long key = static_cast<long long>(window) * 1000003LL + contenders;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double w = window;
  double sum = 0.0;
  for (int j = 2; j <= contenders; ++j) {
    const double cj = comb(contenders, j) * std::pow(1.0 / w, j);
    for (int i = 0; i <= window - 2; ++i)
      sum += cj * std::pow((w - i - 1.0) / w, contenders - j);
  }
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, sum);
  return sum;
}

double collision_prob_given_m_exhaustive(int window, int contenders) {
  if (contenders < 2) return 0.0;
  const double w = window;
  double unique_min = 0.0;
  for (int v = 0; v <= window - 1; ++v)
    unique_min += contenders * (1.0 / w) *
                  std::pow((w - 1.0 - v) / w, contenders - 1);
  return 1.0 - unique_min;
}

double first_collision_prob(const ContentionProfile& profile, int window) {
  double pc = 0.0;
  for (std::size_t m = 2; m < profile.count_dist.size(); ++m)
    pc += collision_prob_given_m(window, static_cast<int>(m)) * profile.count_dist[m];
  return pc;
}

double first_collision_prob(const AvailabilityModel& model, const Assignment& assignment,
                            int window) {
  return first_collision_prob(contention_profile(model, assignment), window);
}

int select_window(const ContentionProfile& profile, const MacTiming& timing) {
  for (int w = 2; w <= timing.w_max; ++w)
    if (first_collision_prob(profile, w) <= timing.epsilon_p) return w;
  throw WindowCapExceeded("no window W <= " + std::to_string(timing.w_max) +
                          " meets the collision target " +
                          std::to_string(timing.epsilon_p));
}

int select_window(const AvailabilityModel& model, const Assignment& assignment,
                  const MacTiming& timing) {
  return select_window(contention_profile(model, assignment), timing);
}

double mac_overhead(const MacTiming& timing, int window) {
  const double delta =
      ((window - 1) * timing.slot_us / 2.0 + timing.fixed_overhead_us()) / timing.cycle_us;
  if (delta < 0.0 || delta >= 1.0)
    throw ValidationError("MAC overhead fraction " + std::to_string(delta) +
                          " out of [0, 1) at window " + std::to_string(window));
  return delta;
}

double user_throughput_perfect(const AvailabilityModel& model, const Assignment& assignment,
                               int user, double delta) {
  const auto views = derive_views(assignment, model.num_channels);
  auto idle = [&model](int i, int j) { return model.idle(i, j); };

  double t = assignment.exclusive[user].empty()
                 ? 0.0
                 : 1.0 - prod_busy(model, user, assignment.exclusive[user]);

  const double excl_busy = prod_busy(model, user, assignment.exclusive[user]);
  for (int j : assignment.shared[user]) {
    // Channel j idle, all exclusive channels busy, and j is the one picked
    // among the idle shared channels (uniformly, exactly in expectation).
    const double pick =
        expected_inv_one_plus(idle_probs_excluding(assignment.shared[user], j, user, idle));
    const double theta = excl_busy * model.idle(user, j) * pick;
    const double share = contention_share(model, assignment, views, user, j, idle);
    t += (1.0 - delta) * theta * share;
  }
  return t;
}

double analysis_error_bound(const AvailabilityModel& model, const Assignment& assignment,
                            double epsilon_p) {
  double sum = 0.0;
  for (int i = 0; i < assignment.num_users(); ++i)
    sum += contend_probability(model, assignment, i);
  return epsilon_p * sum;
}

std::pair<double, double> sensing_access_probs(const AvailabilityModel& model,
                                               const SensingModel& sensing, int user,
                                               int channel) {
  const double idle = sensing.idle_indicated(model, user, channel);
  return {idle, 1.0 - idle};
}

AvailabilityModel indicated_model(const AvailabilityModel& model,
                                  const SensingModel& sensing) {
  AvailabilityModel indicated = model;
  for (int i = 0; i < model.num_users; ++i)
    for (int j = 0; j < model.num_channels; ++j)
      indicated.p(i, j) = sensing.idle_indicated(model, i, j);
  return indicated;
}

double user_throughput_imperfect(const AvailabilityModel& model, const Assignment& assignment,
                                 const SensingModel& sensing, int user, double delta) {
  const auto views = derive_views(assignment, model.num_channels);
  auto sidle = [&](int i, int j) { return sensing.idle_indicated(model, i, j); };

  // Direct exclusive access: joint distribution of (truly idle & sensed
  // idle, busy & sensed idle) channel counts; the user picks uniformly
  // among sensed-idle channels and succeeds only on a truly idle one.
  const auto& excl = assignment.exclusive[user];
  const int ne = static_cast<int>(excl.size());
  std::vector<std::vector<double>> dist(ne + 1, std::vector<double>(ne + 1, 0.0));
  dist[0][0] = 1.0;
  int seen = 0;
  for (int j : excl) {
    const double good = model.idle(user, j) * (1.0 - sensing.p_f(user, j));
    const double bad = model.busy(user, j) * (1.0 - sensing.p_d(user, j));
    const double silent = 1.0 - good - bad;
    ++seen;
    for (int k2 = seen; k2 >= 0; --k2)
      for (int k3 = seen - k2; k3 >= 0; --k3) {
        double v = dist[k2][k3] * silent;
        if (k2 > 0) v += dist[k2 - 1][k3] * good;
        if (k3 > 0) v += dist[k2][k3 - 1] * bad;
        dist[k2][k3] = v;
      }
  }
  double t = 0.0;
  for (int k2 = 1; k2 <= ne; ++k2)
    for (int k3 = 0; k3 + k2 <= ne; ++k3)
      t += dist[k2][k3] * k2 / static_cast<double>(k2 + k3);

  // Contention phase: every exclusive channel must be sensed busy (idle ones
  // via false alarm, busy ones via correct detection).
  double all_sensed_busy = 1.0;
  for (int j : excl)
    all_sensed_busy *= model.idle(user, j) * sensing.p_f(user, j) +
                       model.busy(user, j) * sensing.p_d(user, j);

  for (int j : assignment.shared[user]) {
    const double pick = expected_inv_one_plus(
        idle_probs_excluding(assignment.shared[user], j, user, sidle));
    const double theta =
        all_sensed_busy * model.idle(user, j) * (1.0 - sensing.p_f(user, j)) * pick;
    const double share = contention_share(model, assignment, views, user, j, sidle);
    t += (1.0 - delta) * theta * share;
  }
  return t;
}

ThroughputReport network_throughput(const AvailabilityModel& model,
                                    const Assignment& assignment, const MacTiming& timing,
                                    const SensingModel* sensing) {
  ThroughputReport report;
  const bool imperfect = sensing != nullptr && !sensing->is_perfect();
  // Contention load follows what the sensors report, so window selection
  // and the error bound use the indicated availability.
  const AvailabilityModel contention =
      imperfect ? indicated_model(model, *sensing) : model;
  report.window = select_window(contention, assignment, timing);
  report.overhead = mac_overhead(timing, report.window);
  report.error_bound = analysis_error_bound(contention, assignment, timing.epsilon_p);
  report.mode = imperfect ? ThroughputMode::Imperfect : ThroughputMode::Perfect;
  report.per_user.resize(assignment.num_users());
  for (int i = 0; i < assignment.num_users(); ++i)
    report.per_user[i] =
        imperfect
            ? user_throughput_imperfect(model, assignment, *sensing, i, report.overhead)
            : user_throughput_perfect(model, assignment, i, report.overhead);
  report.total = 0.0;
  for (double v : report.per_user) report.total += v;
  return report;
}

BestEffortReport network_throughput_best_effort(const AvailabilityModel& model,
                                                const Assignment& assignment,
                                                const MacTiming& timing,
                                                const SensingModel* sensing) {
  BestEffortReport report;
  try {
    static_cast<ThroughputReport&>(report) = network_throughput(model, assignment, timing, sensing);
    return report;
  } catch (const WindowCapExceeded&) {
  }
  int window = 2;
  for (int w = 2; w <= timing.w_max; ++w) {
    const double delta =
        ((w - 1) * timing.slot_us / 2.0 + timing.fixed_overhead_us()) / timing.cycle_us;
    if (delta >= 1.0) break;
    window = w;
  }
  const bool imperfect = sensing != nullptr && !sensing->is_perfect();
  const AvailabilityModel contention =
      imperfect ? indicated_model(model, *sensing) : model;
  report.target_met = false;
  report.window = window;
  report.overhead = mac_overhead(timing, window);
  report.error_bound = analysis_error_bound(contention, assignment, timing.epsilon_p);
  report.mode = imperfect ? ThroughputMode::Imperfect : ThroughputMode::Perfect;
  report.per_user.resize(assignment.num_users());
  for (int i = 0; i < assignment.num_users(); ++i)
    report.per_user[i] =
        imperfect
            ? user_throughput_imperfect(model, assignment, *sensing, i, report.overhead)
            : user_throughput_perfect(model, assignment, i, report.overhead);
  report.total = 0.0;
  for (double v : report.per_user) report.total += v;
  return report;
}

}  // namespace crca

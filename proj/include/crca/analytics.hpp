#ifndef CRCA_ANALYTICS_HPP
#define CRCA_ANALYTICS_HPP

#include "crca/model.hpp"

#include <utility>
#include <vector>

namespace crca {

/// Per-user contention entry probabilities and the distribution of the
/// number of simultaneous contenders per cycle.
struct ContentionProfile {
  std::vector<double> contend;     // P_con per user
  std::vector<double> count_dist;  // Pr{m users contend}, m = 0..M
};

/// Distribution of a sum of independent Bernoulli(probs[k]) indicators.
std::vector<double> count_distribution(const std::vector<double>& probs);

/// E[1 / (1 + K)] for K the Bernoulli-sum above.
double expected_inv_one_plus(const std::vector<double>& probs);

/// Throughput of user i on an exclusive channel set: probability that at
/// least one channel in the set is idle. Empty set gives 0.
double user_throughput_nonoverlap(const AvailabilityModel& model,
                                  const std::vector<int>& channels, int user);

/// Throughput increase for user i if `candidate` is added to its exclusive
/// set: p_ij* times the all-busy probability of the current set.
double marginal_gain_nonoverlap(const AvailabilityModel& model,
                                const std::vector<int>& channels, int user, int candidate);

/// High-availability estimate of the throughput increase when `channel`
/// (currently held by `sharers`) is additionally granted to `user`, under
/// MAC overhead `delta`. Sum of the three dominant-event terms.
double estimate_overlap_gain(const AvailabilityModel& model, const Assignment& assignment,
                             int user, int channel, const std::vector<int>& sharers,
                             double delta);

/// Probability user i enters the contention phase: all exclusive channels
/// busy and at least one shared channel idle.
double contend_probability(const AvailabilityModel& model, const Assignment& assignment,
                           int user);

ContentionProfile contention_profile(const AvailabilityModel& model,
                                     const Assignment& assignment);

/// Pr{m users contend}, m = 0..M.
std::vector<double> contenders_distribution(const AvailabilityModel& model,
                                            const Assignment& assignment);

/// Conditional first-collision probability with m contenders and window W.
/// Implements the reference double sum verbatim, whose inner index stops at
/// W-2; see collision_prob_given_m_exhaustive for the untruncated value.
double collision_prob_given_m(int window, int contenders);

/// Exact first-collision probability under exhaustive backoff enumeration:
/// one minus the probability of a unique minimum backoff.
double collision_prob_given_m_exhaustive(int window, int contenders);

/// First-collision probability of the scenario at window W.
double first_collision_prob(const AvailabilityModel& model, const Assignment& assignment,
                            int window);
double first_collision_prob(const ContentionProfile& profile, int window);

/// Smallest W in [2, w_max] with first-collision probability <= epsilon_p.
/// Throws WindowCapExceeded when no such W exists.
int select_window(const AvailabilityModel& model, const Assignment& assignment,
                  const MacTiming& timing);
int select_window(const ContentionProfile& profile, const MacTiming& timing);

/// Average per-cycle MAC overhead fraction delta(W). Throws ValidationError
/// when the cycle is too short (delta >= 1).
double mac_overhead(const MacTiming& timing, int window);

/// Exact per-user saturation throughput under perfect sensing and the
/// no-collision contention model: direct exclusive access plus the
/// contention-phase contribution for each shared channel.
double user_throughput_perfect(const AvailabilityModel& model, const Assignment& assignment,
                               int user, double delta);

/// Upper bound E_t on the throughput error of the no-collision analysis.
double analysis_error_bound(const AvailabilityModel& model, const Assignment& assignment,
                            double epsilon_p);

/// (P_idle, P_busy): probabilities that user i's sensor permits / forbids
/// access on channel j.
std::pair<double, double> sensing_access_probs(const AvailabilityModel& model,
                                               const SensingModel& sensing, int user,
                                               int channel);

/// The availability model as seen through the sensors: entry (i, j) is the
/// probability that user i's sensor indicates channel j idle. Contention
/// behavior (window selection, collision rates, the error bound) is driven
/// by these indications, not by the true availability.
AvailabilityModel indicated_model(const AvailabilityModel& model,
                                  const SensingModel& sensing);

/// Per-user saturation throughput with sensing errors. Successful credit is
/// earned only on truly idle channels; transmissions on mis-detected busy
/// channels yield zero.
double user_throughput_imperfect(const AvailabilityModel& model, const Assignment& assignment,
                                 const SensingModel& sensing, int user, double delta);

/// Full analytic evaluation: selects W, derives delta, computes per-user
/// throughput in the requested mode, the total, and the error bound.
ThroughputReport network_throughput(const AvailabilityModel& model,
                                    const Assignment& assignment, const MacTiming& timing,
                                    const SensingModel* sensing = nullptr);

/// Like network_throughput, but when no window meets the collision target
/// the evaluation falls back to the largest window whose overhead stays
/// below 1 and flags that the target was missed. Used to rank baselines
/// whose contention load is unservable at the configured target.
struct BestEffortReport : ThroughputReport {
  bool target_met = true;
};
BestEffortReport network_throughput_best_effort(const AvailabilityModel& model,
                                                const Assignment& assignment,
                                                const MacTiming& timing,
                                                const SensingModel* sensing = nullptr);

}  // namespace crca

#endif

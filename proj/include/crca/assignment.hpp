#ifndef CRCA_ASSIGNMENT_HPP
#define CRCA_ASSIGNMENT_HPP

#include "crca/model.hpp"

#include <optional>

namespace crca {

/// Knobs of the overlapping greedy search. Tie-breaking is always lowest
/// user index, then lowest channel index, everywhere in this module.
struct GreedyConfig {
  // The gain estimate is optimistic (it ignores the overhead growth a grant
  // imposes on already-shared channels), so the floor is calibrated high
  // enough that marginal grants do not erode the exact total.
  double epsilon = 0.02;        // minimum acceptable estimated gain
  double epsilon_delta = 5e-3;  // overhead drift triggering a re-scan
};

enum class ObjectiveKind { SumThroughput, MaxMin };

struct OverlapResult {
  Assignment assignment;
  int window = 2;
  double delta = 0.0;
  int grants = 0;              // committed overlap grants in phase 2
  int rescans = 0;             // scans restarted after an overhead drift
  int max_scan_evaluations = 0;  // candidate gains computed in one scan
};

struct BruteForceResult {
  Assignment assignment;
  double value = 0.0;
  int window = 2;
  double delta = 0.0;
};

/// Greedy non-overlapping assignment: repeatedly hands the channel with
/// the largest marginal throughput gain to the user realizing that gain,
/// until every channel is owned.
Assignment greedy_nonoverlap(const AvailabilityModel& model);

/// Two-phase overlapping assignment: phase 1 is greedy_nonoverlap, phase 2
/// converts channels to shared ones while the estimated gain exceeds
/// config.epsilon, re-estimating when the MAC overhead drifts by more than
/// config.epsilon_delta. Every user keeps at least one exclusive channel
/// from phase 1.
OverlapResult greedy_overlap(const AvailabilityModel& model, const MacTiming& timing,
                             const GreedyConfig& config = {});

/// Max-min greedy non-overlapping assignment: each round grants the best
/// remaining channel to (one of) the currently worst-off users.
Assignment fair_nonoverlap(const AvailabilityModel& model);

/// Max-min overlapping assignment: starts from fair_nonoverlap, then keeps
/// accepting sharing configurations that strictly raise the minimum
/// per-user throughput.
Assignment fair_overlap(const AvailabilityModel& model, const MacTiming& timing,
                        const GreedyConfig& config = {});

/// One improvement scan on behalf of minimum-throughput `user`: tries to
/// share others' exclusive channels (with every subset of up to M-2 extra
/// joiners) and others' shared channels (with every subset of new joiners),
/// accepting a configuration whenever the worst affected user still beats
/// `t_min`. Returns the last (= best) accepted configuration, or nothing.
std::optional<Assignment> search_potential(const AvailabilityModel& model,
                                           const Assignment& assignment, int user,
                                           double t_min, double delta);

/// Exhaustive search over all per-channel holder sets (2^(M*N) candidates).
/// Candidates whose contention window or overhead is infeasible are skipped.
/// Throws CapExceeded when M*N > cap.
BruteForceResult brute_force_optimal(const AvailabilityModel& model, const MacTiming& timing,
                                     ObjectiveKind objective, int cap = 18);

/// Availability-blind baseline: channel j goes to users j, j+1, ...,
/// j+k_share-1 (mod M). k_share = 1 is the plain round-robin split.
Assignment round_robin(const AvailabilityModel& model, int k_share);

}  // namespace crca

#endif

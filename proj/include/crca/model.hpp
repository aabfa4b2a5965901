#ifndef CRCA_MODEL_HPP
#define CRCA_MODEL_HPP

#include <Eigen/Dense>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace crca {

using Matrix = Eigen::MatrixXd;

/// Scenario or assignment violates a structural invariant. The message names
/// the first violated invariant using 1-based (external) indices.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No contention window W <= w_max meets the target collision probability.
struct WindowCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Problem size exceeds the configured exhaustive-search cap.
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-(user, channel) idle probabilities. p(i, j) is the probability that
/// channel j is idle at user i during a cycle, independent across pairs.
/// Users and channels are 0-based internally, 1-based in files and messages.
struct AvailabilityModel {
  int num_users = 0;
  int num_channels = 0;
  Matrix p;

  double idle(int user, int channel) const { return p(user, channel); }
  double busy(int user, int channel) const { return 1.0 - p(user, channel); }
};

/// Channel sets per user: `exclusive[i]` holds channels assigned to user i
/// alone, `shared[i]` holds channels user i shares with at least one other
/// user. All sets are kept sorted ascending; channels may be left unassigned.
struct Assignment {
  std::vector<std::vector<int>> exclusive;
  std::vector<std::vector<int>> shared;

  int num_users() const { return static_cast<int>(exclusive.size()); }
  std::vector<int> total(int user) const;
  static Assignment empty(int num_users);
};

/// x(i, j) = 1 iff channel j is assigned to user i (exclusively or shared).
struct BinaryAssignmentMatrix {
  Eigen::MatrixXi x;
};

struct DerivedViews {
  std::vector<std::vector<int>> sharers;   // U_j per channel ({owner} for exclusive)
  std::map<int, std::vector<int>> groups;  // G_l: channels shared by l >= 2 users
  std::vector<int> owner;                  // exclusive owner per channel, -1 if none
};

/// MAC timing block. Durations in microseconds.
struct MacTiming {
  double slot_us = 20.0;  // one backoff unit
  double rts_us = 48.0;
  double cts_us = 40.0;
  double sifs_us = 28.0;
  double sen_us = 0.0;
  double syn_us = 0.0;
  double cycle_us = 3000.0;
  double epsilon_p = 0.03;  // target first-collision probability
  int w_max = 1024;         // contention-window search cap

  double fixed_overhead_us() const {
    return rts_us + cts_us + 3.0 * sifs_us + sen_us + syn_us;
  }
};

/// Parameter block used throughout the evaluation section of the reference
/// MAC design: 802.11a/g basic-rate RTS/CTS, 3 ms cycle.
MacTiming paper2012_timing();

/// Detection / false-alarm probabilities per (user, channel). The perfect
/// variant has P_d = 1, P_f = 0 everywhere, collapsing access probabilities
/// to the availability model.
struct SensingModel {
  Matrix p_d;
  Matrix p_f;

  static SensingModel perfect(int num_users, int num_channels);
  bool is_perfect() const;

  // Probability that user i's sensor reports channel j idle.
  double idle_indicated(const AvailabilityModel& model, int user, int channel) const {
    return (1.0 - p_f(user, channel)) * model.idle(user, channel) +
           (1.0 - p_d(user, channel)) * model.busy(user, channel);
  }
  double busy_indicated(const AvailabilityModel& model, int user, int channel) const {
    return 1.0 - idle_indicated(model, user, channel);
  }
};

enum class ThroughputMode { Perfect, Imperfect };

/// Output of the analytic engine for one scenario + assignment.
struct ThroughputReport {
  std::vector<double> per_user;
  double total = 0.0;
  int window = 2;
  double overhead = 0.0;     // delta
  double error_bound = 0.0;  // E_t
  ThroughputMode mode = ThroughputMode::Perfect;
};

void validate_model(const AvailabilityModel& model);
void validate_assignment(const AvailabilityModel& model, const Assignment& assignment);
void validate_timing(const MacTiming& timing);
void validate_sensing(const AvailabilityModel& model, const SensingModel& sensing);

/// Validates every invariant of the full scenario; throws ValidationError
/// naming the first violation. Sensing may be null (perfect).
void validate_scenario(const AvailabilityModel& model, const Assignment& assignment,
                       const MacTiming& timing, const SensingModel* sensing = nullptr);

/// Recomputes U_j, G_l and exclusive ownership from the channel sets.
/// Channels held exclusively appear with a singleton sharer set and are
/// excluded from every G_l.
DerivedViews derive_views(const Assignment& assignment, int num_channels);

BinaryAssignmentMatrix to_binary(const Assignment& assignment, int num_channels);
Assignment from_binary(const BinaryAssignmentMatrix& binary);

/// Sorts and dedups all channel sets in place.
void canonicalize(Assignment& assignment);

}  // namespace crca

#endif

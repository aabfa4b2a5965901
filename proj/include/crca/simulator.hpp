#ifndef CRCA_SIMULATOR_HPP
#define CRCA_SIMULATOR_HPP

#include "crca/model.hpp"

#include <cstdint>
#include <vector>

namespace crca {

enum class OverheadMode {
  Analytic,  // winners earn 1 - delta, direct transmitters earn 1
  Timed      // per-transmission elapsed-time accounting
};

struct SimConfig {
  std::int64_t cycles = 100000;
  std::uint64_t seed = 1;
  OverheadMode overhead_mode = OverheadMode::Analytic;
  int window_override = 0;  // 0: pick the window from the collision target
  int threads = 1;
};

struct SimReport {
  std::vector<double> per_user;     // mean successful fraction per cycle
  std::vector<double> per_user_se;  // standard error of each mean
  double total = 0.0;
  double total_se = 0.0;
  double first_collision_rate = 0.0;
  std::vector<std::int64_t> contender_histogram;  // index = contender count
  std::int64_t cycles = 0;
  int window = 2;
  double delta = 0.0;
};

/// Outcome of one protocol cycle, exposed for white-box tests.
struct CycleOutcome {
  std::vector<double> credit;
  int contenders = 0;
  bool first_collision = false;
};

/// Deterministic substream generator: cycle k of run `seed` always draws
/// the same values, independent of execution order. Draw order within a
/// cycle: channel availability (users x channels, row-major), sensing
/// indications (row-major, imperfect sensing only), per-user channel
/// choices (ascending user), backoffs (ascending contending user).
struct SubstreamRng {
  std::uint64_t state;

  explicit SubstreamRng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next();
  double uniform01();
  int uniform_int(int n);  // uniform over {0, ..., n-1}
};

/// Plays out one cycle: sensing, direct exclusive access, then backoff
/// contention on the control channel. Equal backoffs collide and knock all
/// holders out; a sole claimant grabs its chosen channel and every later
/// contender aiming at that channel quits. Transmissions succeed only on
/// truly idle channels.
CycleOutcome simulate_cycle(const AvailabilityModel& model, const Assignment& assignment,
                            const MacTiming& timing, int window, double delta,
                            OverheadMode mode, const SensingModel* sensing,
                            SubstreamRng& rng);

/// Monte Carlo estimate over config.cycles independent cycles.
/// Bit-reproducible for a fixed (seed, config, scenario) regardless of
/// thread count.
SimReport simulate(const AvailabilityModel& model, const Assignment& assignment,
                   const MacTiming& timing, const SimConfig& config,
                   const SensingModel* sensing = nullptr);

/// Empirical first-collision rate for each window in `windows`.
std::vector<std::pair<int, double>> empirical_collision_prob(
    const AvailabilityModel& model, const Assignment& assignment, const MacTiming& timing,
    const std::vector<int>& windows, const SimConfig& config,
    const SensingModel* sensing = nullptr);

}  // namespace crca

#endif

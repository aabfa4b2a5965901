#include "crca/simulator.hpp"

#include "crca/analytics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <utility>
#include <vector>

namespace crca {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SubstreamRng::SubstreamRng(std::uint64_t seed, std::uint64_t stream) {
  // Decorrelate the run seed from the stream index before mixing.
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  s = stream ^ 0x6A09E667F3BCC909ULL;
  state = a ^ splitmix64(s);
}

std::uint64_t SubstreamRng::next() { return splitmix64(state); }

double SubstreamRng::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

int SubstreamRng::uniform_int(int n) {
  return static_cast<int>((static_cast<unsigned __int128>(next()) *
                           static_cast<unsigned __int128>(n)) >>
                          64);
}

CycleOutcome simulate_cycle(const AvailabilityModel& model, const Assignment& assignment,
                            const MacTiming& timing, int window, double delta,
                            OverheadMode mode, const SensingModel* sensing,
                            SubstreamRng& rng) {
  const int m = model.num_users;
  const int n = model.num_channels;
  const bool imperfect = sensing != nullptr && !sensing->is_perfect();

  std::vector<char> idle(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      idle[i * n + j] = rng.uniform01() < model.idle(i, j) ? 1 : 0;

  std::vector<char> sensed = idle;
  if (imperfect) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const double u = rng.uniform01();
        sensed[i * n + j] = idle[i * n + j] ? (u < 1.0 - sensing->p_f(i, j) ? 1 : 0)
                                            : (u < 1.0 - sensing->p_d(i, j) ? 1 : 0);
      }
  }

  const double direct_credit =
      mode == OverheadMode::Analytic
          ? 1.0
          : (timing.cycle_us - timing.sen_us - timing.syn_us) / timing.cycle_us;

  CycleOutcome out;
  out.credit.assign(m, 0.0);

  struct Contender {
    int user;
    int channel;
    int backoff;
  };
  std::vector<Contender> contenders;
  std::vector<int> candidates;
  for (int i = 0; i < m; ++i) {
    candidates.clear();
    for (int j : assignment.exclusive[i])
      if (sensed[i * n + j]) candidates.push_back(j);
    if (!candidates.empty()) {
      const int j = candidates[rng.uniform_int(static_cast<int>(candidates.size()))];
      if (idle[i * n + j]) out.credit[i] = direct_credit;
      continue;
    }
    for (int j : assignment.shared[i])
      if (sensed[i * n + j]) candidates.push_back(j);
    if (!candidates.empty()) {
      const int j = candidates[rng.uniform_int(static_cast<int>(candidates.size()))];
      contenders.push_back({i, j, 0});
    }
  }
  for (auto& c : contenders) c.backoff = rng.uniform_int(window);
  out.contenders = static_cast<int>(contenders.size());

  std::vector<char> active(contenders.size(), 1);
  bool first_value = true;
  for (int value = 0; value < window; ++value) {
    int holder = -1, count = 0;
    for (std::size_t k = 0; k < contenders.size(); ++k)
      if (active[k] && contenders[k].backoff == value) {
        ++count;
        holder = static_cast<int>(k);
      }
    if (count == 0) continue;
    if (first_value) {
      out.first_collision = count >= 2;
      first_value = false;
    }
    if (count >= 2) {
      for (std::size_t k = 0; k < contenders.size(); ++k)
        if (active[k] && contenders[k].backoff == value) active[k] = 0;
      continue;
    }
    const Contender& win = contenders[holder];
    active[holder] = 0;
    if (idle[win.user * n + win.channel]) {
      double credit = 1.0 - delta;
      if (mode == OverheadMode::Timed) {
        const double spent = timing.sen_us + timing.syn_us + win.backoff * timing.slot_us +
                             timing.rts_us + timing.cts_us + 3.0 * timing.sifs_us;
        credit = std::max(0.0, (timing.cycle_us - spent) / timing.cycle_us);
      }
      out.credit[win.user] = credit;
    }
    // Everyone overhearing a handshake for their own target channel quits.
    for (std::size_t k = 0; k < contenders.size(); ++k)
      if (active[k] && contenders[k].channel == win.channel) active[k] = 0;
  }
  return out;
}

SimReport simulate(const AvailabilityModel& model, const Assignment& assignment,
                   const MacTiming& timing, const SimConfig& config,
                   const SensingModel* sensing) {
  const int m = model.num_users;
  SimReport report;
  report.cycles = config.cycles;
  if (config.window_override > 0) {
    // Forced windows (e.g., collision-curve sweeps) bypass the overhead
    // feasibility check; the overhead fraction saturates at 1.
    report.window = config.window_override;
    report.delta = std::clamp(((report.window - 1) * timing.slot_us / 2.0 +
                               timing.fixed_overhead_us()) /
                                  timing.cycle_us,
                              0.0, 1.0);
  } else {
    // Contention load follows the sensor indications, so the window target
    // is evaluated on the indicated availability (as in the analysis).
    const bool imperfect = sensing != nullptr && !sensing->is_perfect();
    report.window = select_window(
        imperfect ? indicated_model(model, *sensing) : model, assignment, timing);
    report.delta = mac_overhead(timing, report.window);
  }

  struct Partial {
    std::vector<double> sum, sumsq;
    double total_sum = 0.0, total_sumsq = 0.0;
    std::int64_t collisions = 0;
    std::vector<std::int64_t> histogram;
  };

  // Fixed chunking keeps the floating-point reduction order independent of
  // the thread count.
  const std::int64_t chunk_size = 8192;
  const std::int64_t num_chunks = (config.cycles + chunk_size - 1) / chunk_size;
  std::vector<Partial> partials(num_chunks);

  auto run_chunk = [&](std::int64_t c) {
    Partial& p = partials[c];
    p.sum.assign(m, 0.0);
    p.sumsq.assign(m, 0.0);
    p.histogram.assign(m + 1, 0);
    const std::int64_t lo = c * chunk_size;
    const std::int64_t hi = std::min(config.cycles, lo + chunk_size);
    for (std::int64_t cycle = lo; cycle < hi; ++cycle) {
      SubstreamRng rng(config.seed, static_cast<std::uint64_t>(cycle));
      const CycleOutcome out = simulate_cycle(model, assignment, timing, report.window,
                                              report.delta, config.overhead_mode, sensing,
                                              rng);
      double total = 0.0;
      for (int i = 0; i < m; ++i) {
        p.sum[i] += out.credit[i];
        p.sumsq[i] += out.credit[i] * out.credit[i];
        total += out.credit[i];
      }
      p.total_sum += total;
      p.total_sumsq += total * total;
      if (out.first_collision) ++p.collisions;
      ++p.histogram[out.contenders];
    }
  };

  const int threads = std::max(1, config.threads);
  if (threads == 1 || num_chunks <= 1) {
    for (std::int64_t c = 0; c < num_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::int64_t> next_chunk{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<std::int64_t>(threads, num_chunks); ++t)
      pool.emplace_back([&] {
        for (std::int64_t c = next_chunk.fetch_add(1); c < num_chunks;
             c = next_chunk.fetch_add(1))
          run_chunk(c);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<double> sum(m, 0.0), sumsq(m, 0.0);
  double total_sum = 0.0, total_sumsq = 0.0;
  std::int64_t collisions = 0;
  report.contender_histogram.assign(m + 1, 0);
  for (const Partial& p : partials) {
    for (int i = 0; i < m; ++i) {
      sum[i] += p.sum[i];
      sumsq[i] += p.sumsq[i];
    }
    total_sum += p.total_sum;
    total_sumsq += p.total_sumsq;
    collisions += p.collisions;
    for (int k = 0; k <= m; ++k) report.contender_histogram[k] += p.histogram[k];
  }

  const double nc = static_cast<double>(config.cycles);
  report.per_user.resize(m);
  report.per_user_se.resize(m);
  for (int i = 0; i < m; ++i) {
    const double mean = sum[i] / nc;
    report.per_user[i] = mean;
    const double var = std::max(0.0, sumsq[i] / nc - mean * mean);
    report.per_user_se[i] = std::sqrt(var / nc);
  }
  report.total = total_sum / nc;
  const double tvar = std::max(0.0, total_sumsq / nc - report.total * report.total);
  report.total_se = std::sqrt(tvar / nc);
  report.first_collision_rate = static_cast<double>(collisions) / nc;
  return report;
}

std::vector<std::pair<int, double>> empirical_collision_prob(
    const AvailabilityModel& model, const Assignment& assignment, const MacTiming& timing,
    const std::vector<int>& windows, const SimConfig& config, const SensingModel* sensing) {
  std::vector<std::pair<int, double>> curve;
  curve.reserve(windows.size());
  for (int w : windows) {
    SimConfig c = config;
    c.window_override = w;
    curve.emplace_back(w, simulate(model, assignment, timing, c, sensing).first_collision_rate);
  }
  return curve;
}

}  // namespace crca

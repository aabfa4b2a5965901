// Command-line harness: scenario generation, channel assignment, analytic
// and Monte Carlo evaluation, parameter sweeps, and greedy-vs-optimal
// comparisons. All tabular output is CSV.
//
// Exit codes: 0 success, 2 validation/usage error, 3 window infeasibility,
// 4 exhaustive-search cap exceeded.

#include <CLI11.hpp>

#include "crca/analytics.hpp"
#include "crca/assignment.hpp"
#include "crca/model.hpp"
#include "crca/scenario_io.hpp"
#include "crca/simulator.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace crca;

int default_threads() {
  if (const char* env = std::getenv("CRCA_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

// Relative output paths land in CRCA_OUTPUT_DIR when it is set.
std::string resolve_output(const std::string& path) {
  const char* dir = std::getenv("CRCA_OUTPUT_DIR");
  if (!dir || !*dir || path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  atomic_write(resolve_output(path), content);
}

AvailabilityModel generate_model(int users, int channels, double low, double high,
                                 std::uint64_t seed) {
  if (!(0.0 <= low && low <= high && high <= 1.0))
    throw ValidationError("probability range must satisfy 0 <= low <= high <= 1");
  AvailabilityModel model;
  model.num_users = users;
  model.num_channels = channels;
  model.p.resize(users, channels);
  SubstreamRng rng(seed, 0);
  for (int i = 0; i < users; ++i)
    for (int j = 0; j < channels; ++j)
      model.p(i, j) = low + (high - low) * rng.uniform01();
  return model;
}

struct AlgorithmChoice {
  std::string name;
  int rr_k = 0;  // > 0 for round-robin variants
};

AlgorithmChoice parse_algorithm(const std::string& text) {
  AlgorithmChoice choice;
  choice.name = text;
  if (text.rfind("rr:", 0) == 0) {
    choice.rr_k = std::atoi(text.c_str() + 3);
    if (choice.rr_k < 1) throw ValidationError("rr:k needs k >= 1");
    choice.name = "rr:" + std::to_string(choice.rr_k);
    return choice;
  }
  if (text != "alg1" && text != "alg2" && text != "alg3" && text != "alg4" &&
      text != "brute-sum" && text != "brute-maxmin")
    throw ValidationError("unknown algorithm \"" + text +
                          "\" (alg1|alg2|alg3|alg4|brute-sum|brute-maxmin|rr:k)");
  return choice;
}

Assignment run_algorithm(const AlgorithmChoice& choice, const AvailabilityModel& model,
                         const MacTiming& timing) {
  if (choice.rr_k > 0) return round_robin(model, choice.rr_k);
  if (choice.name == "alg1") return greedy_nonoverlap(model);
  if (choice.name == "alg2") return greedy_overlap(model, timing).assignment;
  if (choice.name == "alg3") return fair_nonoverlap(model);
  if (choice.name == "alg4") return fair_overlap(model, timing);
  if (choice.name == "brute-sum")
    return brute_force_optimal(model, timing, ObjectiveKind::SumThroughput).assignment;
  return brute_force_optimal(model, timing, ObjectiveKind::MaxMin).assignment;
}

Assignment assignment_for(const Scenario& scenario, const std::string& algorithm) {
  if (!algorithm.empty())
    return run_algorithm(parse_algorithm(algorithm), scenario.model, scenario.timing);
  if (scenario.assignment) return *scenario.assignment;
  throw ValidationError("no assignment: embed one in the scenario or pass --algorithm");
}

std::string joined(const std::vector<double>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ';';
    out << values[i];
  }
  return out.str();
}

std::uint64_t instance_seed(std::uint64_t master, std::uint64_t point,
                            std::uint64_t realization) {
  // Stable derivation so any CSV row can be regenerated in isolation.
  SubstreamRng rng(master, (point << 20) + realization + 1);
  return rng.next();
}

int cmd_gen(int users, int channels, double low, double high, std::uint64_t seed,
            const std::string& id, double epsilon_p, const std::string& out) {
  Scenario sc;
  sc.id = id;
  sc.model = generate_model(users, channels, low, high, seed);
  sc.timing.epsilon_p = epsilon_p;
  validate_scenario(sc.model, Assignment::empty(users), sc.timing, nullptr);
  emit(out, scenario_to_json(sc));
  return 0;
}

int cmd_assign(const std::string& scenario_path, const std::string& algorithm,
               const std::string& out, const std::string& edges) {
  Scenario sc = load_scenario(scenario_path);
  const AlgorithmChoice choice = parse_algorithm(algorithm);
  sc.assignment = run_algorithm(choice, sc.model, sc.timing);
  const auto report = network_throughput_best_effort(sc.model, *sc.assignment, sc.timing,
                                                     sc.sensing ? &*sc.sensing : nullptr);
  std::cerr << "algorithm=" << choice.name << " window=" << report.window
            << " delta=" << report.overhead << " total=" << report.total
            << (report.target_met ? "" : " (collision target unmet)") << "\n";
  if (!edges.empty()) atomic_write(resolve_output(edges), assignment_csv(*sc.assignment));
  emit(out, scenario_to_json(sc));
  return 0;
}

int cmd_analyze(const std::string& scenario_path, const std::string& algorithm,
                const std::string& csv) {
  const Scenario sc = load_scenario(scenario_path);
  const Assignment as = assignment_for(sc, algorithm);
  const SensingModel* sensing = sc.sensing ? &*sc.sensing : nullptr;
  validate_scenario(sc.model, as, sc.timing, sensing);
  const ThroughputReport report = network_throughput(sc.model, as, sc.timing, sensing);

  std::ostringstream out;
  out << "user,throughput,window,delta,error_bound,mode\n";
  const char* mode = report.mode == ThroughputMode::Perfect ? "perfect" : "imperfect";
  for (int i = 0; i < static_cast<int>(report.per_user.size()); ++i)
    out << (i + 1) << ',' << report.per_user[i] << ',' << report.window << ','
        << report.overhead << ',' << report.error_bound << ',' << mode << '\n';
  out << "total," << report.total << ',' << report.window << ',' << report.overhead << ','
      << report.error_bound << ',' << mode << '\n';
  emit(csv, out.str());
  return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& algorithm,
                 std::int64_t cycles, std::uint64_t seed, const std::string& mode,
                 int window, int threads, const std::string& csv) {
  const Scenario sc = load_scenario(scenario_path);
  const Assignment as = assignment_for(sc, algorithm);
  const SensingModel* sensing = sc.sensing ? &*sc.sensing : nullptr;
  validate_scenario(sc.model, as, sc.timing, sensing);

  SimConfig config;
  config.cycles = cycles;
  config.seed = seed;
  config.window_override = window;
  config.threads = threads;
  if (mode == "analytic")
    config.overhead_mode = OverheadMode::Analytic;
  else if (mode == "timed")
    config.overhead_mode = OverheadMode::Timed;
  else
    throw ValidationError("mode must be analytic or timed");

  const SimReport report = simulate(sc.model, as, sc.timing, config, sensing);
  std::ostringstream out;
  out << "user,throughput,se,window,delta,first_collision_rate,cycles\n";
  for (int i = 0; i < static_cast<int>(report.per_user.size()); ++i)
    out << (i + 1) << ',' << report.per_user[i] << ',' << report.per_user_se[i] << ','
        << report.window << ',' << report.delta << ',' << report.first_collision_rate
        << ',' << report.cycles << '\n';
  out << "total," << report.total << ',' << report.total_se << ',' << report.window << ','
      << report.delta << ',' << report.first_collision_rate << ',' << report.cycles
      << '\n';
  emit(csv, out.str());

  std::ostringstream hist;
  hist << "contenders:";
  for (std::size_t k = 0; k < report.contender_histogram.size(); ++k)
    hist << ' ' << k << '=' << report.contender_histogram[k];
  std::cerr << hist.str() << "\n";
  return 0;
}

struct SweepOptions {
  std::string variable = "channels";
  int users = 2;
  int channels = 0;  // fixed N for non-channel sweeps
  double from = 0, to = 0, step = 1;
  double low = 0.7, high = 0.9;
  double p_d = 0.9;
  int realizations = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> algorithms;
  std::string evaluate = "analytic";
  std::string out, summary;
};

int cmd_sweep(const SweepOptions& opt) {
  if (opt.to < opt.from || opt.step <= 0)
    throw ValidationError("sweep grid must satisfy from <= to, step > 0");
  std::int64_t sim_cycles = 0;
  bool want_analytic = false, want_sim = false;
  if (opt.evaluate == "analytic") {
    want_analytic = true;
  } else if (opt.evaluate == "both") {
    want_analytic = want_sim = true;
    sim_cycles = 100000;
  } else if (opt.evaluate.rfind("simulate:", 0) == 0) {
    want_sim = true;
    sim_cycles = std::atoll(opt.evaluate.c_str() + 9);
    if (sim_cycles < 1) throw ValidationError("simulate:<cycles> needs cycles >= 1");
  } else {
    throw ValidationError("evaluate must be analytic, simulate:<cycles>, or both");
  }

  std::vector<AlgorithmChoice> algorithms;
  for (const auto& a : opt.algorithms) algorithms.push_back(parse_algorithm(a));
  if (algorithms.empty()) throw ValidationError("at least one --algorithms entry required");

  std::ostringstream rows;
  rows << "variable,value,master_seed,realization,algorithm,source,window,delta,"
          "total,min,per_user,collision_prob,target_met\n";

  struct Key {
    double value;
    std::string algorithm, source;
    bool operator<(const Key& o) const {
      if (value != o.value) return value < o.value;
      if (algorithm != o.algorithm) return algorithm < o.algorithm;
      return source < o.source;
    }
  };
  std::map<Key, std::pair<double, double>> sums;  // (total, min) accumulators
  std::map<Key, int> counts;

  int point = 0;
  for (double value = opt.from; value <= opt.to + 1e-12; value += opt.step, ++point) {
    for (int r = 0; r < opt.realizations; ++r) {
      // A window sweep varies only the contention window, so every window
      // value reuses the same random instance per realization.
      const std::uint64_t seed =
          instance_seed(opt.seed, opt.variable == "window" ? 0 : point, r);
      int users = opt.users;
      int channels = opt.channels;
      MacTiming timing = paper2012_timing();
      std::optional<SensingModel> sensing;
      if (opt.variable == "channels")
        channels = static_cast<int>(value + 0.5);
      else if (opt.variable == "epsilon-p")
        timing.epsilon_p = value;
      else if (opt.variable == "pf") {
        SensingModel s;
        s.p_d = Matrix::Constant(users, channels, opt.p_d);
        s.p_f = Matrix::Constant(users, channels, value);
        sensing = std::move(s);
      } else if (opt.variable != "window") {
        throw ValidationError("variable must be channels, window, epsilon-p, or pf");
      }
      if (channels < 1) throw ValidationError("--channels required for this sweep");
      const AvailabilityModel model =
          generate_model(users, channels, opt.low, opt.high, seed);

      for (const auto& choice : algorithms) {
        const Assignment as = run_algorithm(choice, model, timing);
        const SensingModel* sm = sensing ? &*sensing : nullptr;

        auto record = [&](const std::string& source, int window, double delta,
                          double total, double tmin, const std::vector<double>& per_user,
                          double collision, bool target_met) {
          rows << opt.variable << ',' << value << ',' << opt.seed << ',' << r << ','
               << choice.name << ',' << source << ',' << window << ',' << delta << ','
               << total << ',' << tmin << ',' << joined(per_user) << ',' << collision
               << ',' << (target_met ? 1 : 0) << '\n';
          Key key{value, choice.name, source};
          sums[key].first += total;
          sums[key].second += tmin;
          counts[key] += 1;
        };

        if (opt.variable == "window") {
          const int w = static_cast<int>(value + 0.5);
          const double analytic_pc = first_collision_prob(model, as, w);
          const double delta =
              std::clamp(((w - 1) * timing.slot_us / 2.0 + timing.fixed_overhead_us()) /
                             timing.cycle_us,
                         0.0, 1.0);
          std::vector<double> per_user(users);
          double total = 0.0;
          for (int i = 0; i < users; ++i) {
            per_user[i] = user_throughput_perfect(model, as, i, delta);
            total += per_user[i];
          }
          record("analytic", w, delta, total,
                 *std::min_element(per_user.begin(), per_user.end()), per_user,
                 analytic_pc, true);
          if (want_sim) {
            SimConfig config;
            config.cycles = sim_cycles;
            config.seed = seed;
            config.window_override = w;
            config.threads = default_threads();
            const SimReport sim = simulate(model, as, timing, config, sm);
            record("simulated", w, sim.delta, sim.total,
                   *std::min_element(sim.per_user.begin(), sim.per_user.end()),
                   sim.per_user, sim.first_collision_rate, true);
          }
          continue;
        }

        if (want_analytic) {
          const BestEffortReport rep = network_throughput_best_effort(model, as, timing, sm);
          record("analytic", rep.window, rep.overhead, rep.total,
                 *std::min_element(rep.per_user.begin(), rep.per_user.end()), rep.per_user,
                 first_collision_prob(model, as, rep.window), rep.target_met);
        }
        if (want_sim) {
          SimConfig config;
          config.cycles = sim_cycles;
          config.seed = seed;
          config.threads = default_threads();
          try {
            const SimReport sim = simulate(model, as, timing, config, sm);
            record("simulated", sim.window, sim.delta, sim.total,
                   *std::min_element(sim.per_user.begin(), sim.per_user.end()),
                   sim.per_user, sim.first_collision_rate, true);
          } catch (const WindowCapExceeded&) {
            // No window meets the target: simulate at the best-effort window.
            SimConfig fb = config;
            fb.window_override =
                network_throughput_best_effort(model, as, timing, sm).window;
            const SimReport sim = simulate(model, as, timing, fb, sm);
            record("simulated", sim.window, sim.delta, sim.total,
                   *std::min_element(sim.per_user.begin(), sim.per_user.end()),
                   sim.per_user, sim.first_collision_rate, false);
          }
        }
      }
    }
  }
  emit(opt.out, rows.str());

  std::ostringstream summary;
  summary << "value,algorithm,source,realizations,mean_total,mean_min\n";
  for (const auto& [key, acc] : sums) {
    const int c = counts[key];
    summary << key.value << ',' << key.algorithm << ',' << key.source << ',' << c << ','
            << acc.first / c << ',' << acc.second / c << '\n';
  }
  if (!opt.summary.empty()) atomic_write(resolve_output(opt.summary), summary.str());
  return 0;
}

int cmd_compare_optimal(int users, int channels_from, int channels_to, int realizations,
                        double low, double high, std::uint64_t seed, int cap,
                        const std::string& out) {
  std::ostringstream rows;
  rows << "users,channels,master_seed,realization,objective,greedy,optimal,gap\n";
  int point = 0;
  for (int n = channels_from; n <= channels_to; ++n, ++point) {
    for (int r = 0; r < realizations; ++r) {
      const std::uint64_t s = instance_seed(seed, point, r);
      const AvailabilityModel model = generate_model(users, n, low, high, s);
      const MacTiming timing = paper2012_timing();

      const OverlapResult greedy = greedy_overlap(model, timing);
      const ThroughputReport greedy_rep =
          network_throughput(model, greedy.assignment, timing);
      const BruteForceResult opt_sum =
          brute_force_optimal(model, timing, ObjectiveKind::SumThroughput, cap);
      const double gap_sum =
          opt_sum.value > 0 ? (opt_sum.value - greedy_rep.total) / opt_sum.value : 0.0;
      rows << users << ',' << n << ',' << seed << ',' << r << ",sum," << greedy_rep.total
           << ',' << opt_sum.value << ',' << gap_sum << '\n';

      const Assignment fair = fair_overlap(model, timing);
      const ThroughputReport fair_rep = network_throughput(model, fair, timing);
      const double fair_min =
          *std::min_element(fair_rep.per_user.begin(), fair_rep.per_user.end());
      const BruteForceResult opt_min =
          brute_force_optimal(model, timing, ObjectiveKind::MaxMin, cap);
      const double gap_min =
          opt_min.value > 0 ? (opt_min.value - fair_min) / opt_min.value : 0.0;
      rows << users << ',' << n << ',' << seed << ',' << r << ",maxmin," << fair_min << ','
           << opt_min.value << ',' << gap_min << '\n';
    }
  }
  emit(out, rows.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cognitive-radio channel assignment toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random scenario file");
  int g_users = 2, g_channels = 2;
  double g_low = 0.7, g_high = 0.9, g_eps = 0.03;
  std::uint64_t g_seed = 1;
  std::string g_id, g_out;
  gen->add_option("-M,--users", g_users)->required();
  gen->add_option("-N,--channels", g_channels)->required();
  gen->add_option("--low", g_low);
  gen->add_option("--high", g_high);
  gen->add_option("--seed", g_seed);
  gen->add_option("--epsilon-p", g_eps);
  gen->add_option("--id", g_id);
  gen->add_option("-o,--output", g_out);

  // assign
  auto* assign = app.add_subcommand("assign", "run an assignment algorithm");
  std::string a_scenario, a_algorithm, a_out, a_edges;
  assign->add_option("--scenario", a_scenario)->required();
  assign->add_option("--algorithm", a_algorithm)->required();
  assign->add_option("-o,--output", a_out);
  assign->add_option("--edges", a_edges);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "analytic throughput evaluation");
  std::string n_scenario, n_algorithm, n_csv;
  analyze->add_option("--scenario", n_scenario)->required();
  analyze->add_option("--algorithm", n_algorithm);
  analyze->add_option("--csv", n_csv);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation");
  std::string s_scenario, s_algorithm, s_mode = "analytic", s_csv;
  std::int64_t s_cycles = 100000;
  std::uint64_t s_seed = 1;
  int s_window = 0, s_threads = default_threads();
  simulate->add_option("--scenario", s_scenario)->required();
  simulate->add_option("--algorithm", s_algorithm);
  simulate->add_option("--cycles", s_cycles);
  simulate->add_option("--seed", s_seed);
  simulate->add_option("--mode", s_mode);
  simulate->add_option("--window", s_window);
  simulate->add_option("--threads", s_threads);
  simulate->add_option("--csv", s_csv);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
  SweepOptions w;
  sweep->add_option("--variable", w.variable);
  sweep->add_option("-M,--users", w.users)->required();
  sweep->add_option("-N,--channels", w.channels);
  sweep->add_option("--from", w.from)->required();
  sweep->add_option("--to", w.to)->required();
  sweep->add_option("--step", w.step);
  sweep->add_option("--low", w.low);
  sweep->add_option("--high", w.high);
  sweep->add_option("--pd", w.p_d);
  sweep->add_option("--realizations", w.realizations);
  sweep->add_option("--seed", w.seed);
  sweep->add_option("--algorithms", w.algorithms)->required()->delimiter(',');
  sweep->add_option("--evaluate", w.evaluate);
  sweep->add_option("-o,--output", w.out);
  sweep->add_option("--summary", w.summary);

  // compare-optimal
  auto* cmp = app.add_subcommand("compare-optimal", "greedy vs exhaustive search gaps");
  int c_users = 2, c_from = 2, c_to = 4, c_realizations = 1, c_cap = 18;
  double c_low = 0.7, c_high = 0.9;
  std::uint64_t c_seed = 1;
  std::string c_out;
  cmp->add_option("-M,--users", c_users)->required();
  cmp->add_option("--channels-from", c_from)->required();
  cmp->add_option("--channels-to", c_to)->required();
  cmp->add_option("--realizations", c_realizations);
  cmp->add_option("--low", c_low);
  cmp->add_option("--high", c_high);
  cmp->add_option("--seed", c_seed);
  cmp->add_option("--cap", c_cap);
  cmp->add_option("-o,--output", c_out);

  try {
    app.parse(argc, argv);
    if (*gen) return cmd_gen(g_users, g_channels, g_low, g_high, g_seed, g_id, g_eps, g_out);
    if (*assign) return cmd_assign(a_scenario, a_algorithm, a_out, a_edges);
    if (*analyze) return cmd_analyze(n_scenario, n_algorithm, n_csv);
    if (*simulate)
      return cmd_simulate(s_scenario, s_algorithm, s_cycles, s_seed, s_mode, s_window,
                          s_threads, s_csv);
    if (*sweep) return cmd_sweep(w);
    if (*cmp)
      return cmd_compare_optimal(c_users, c_from, c_to, c_realizations, c_low, c_high,
                                 c_seed, c_cap, c_out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const WindowCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

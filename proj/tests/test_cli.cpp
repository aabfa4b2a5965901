#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* path = std::getenv("CRCA_CLI_PATH");
#ifdef CRCA_CLI_PATH
  if (path == nullptr) path = CRCA_CLI_PATH;
#endif
  REQUIRE_MESSAGE(path != nullptr, "CRCA_CLI_PATH must point at the crca binary");
  return path;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

std::vector<std::string> lines_of(const fs::path& file) {
  std::vector<std::string> out;
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("crca-cli-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path operator/(const std::string& name) const { return path / name; }
  static inline int counter = 0;
};

}  // namespace

TEST_CASE("help and argument errors") {
  CHECK(run("--help") == 0);
  CHECK(run("definitely-not-a-subcommand") == 2);
  CHECK(run("gen -M 2") == 2);  // missing required -N
}

TEST_CASE("gen is deterministic and honors the probability range") {
  TempDir dir;
  const auto a = dir / "a.json";
  const auto b = dir / "b.json";
  CHECK(run("gen -M 3 -N 6 --low 0.6 --high 0.9 --seed 11 -o " + a.string()) == 0);
  CHECK(run("gen -M 3 -N 6 --low 0.6 --high 0.9 --seed 11 -o " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  const auto c = dir / "c.json";
  CHECK(run("gen -M 3 -N 6 --low 0.6 --high 0.9 --seed 12 -o " + c.string()) == 0);
  CHECK(slurp(a) != slurp(c));
  const std::string body = slurp(a);
  CHECK(body.find("\"p\"") != std::string::npos);
  CHECK(body.find("\"timing\"") != std::string::npos);
}

TEST_CASE("gen, assign, analyze, simulate pipeline") {
  TempDir dir;
  const auto scenario = dir / "scenario.json";
  const auto assigned = dir / "assigned.json";
  const auto analysis = dir / "analysis.csv";
  const auto sim = dir / "sim.csv";
  REQUIRE(run("gen -M 3 -N 7 --low 0.7 --high 0.95 --seed 4 -o " + scenario.string()) == 0);
  REQUIRE(run("assign --scenario " + scenario.string() + " --algorithm alg2 -o " +
              assigned.string()) == 0);
  const std::string body = slurp(assigned);
  CHECK(body.find("\"assignment\"") != std::string::npos);

  REQUIRE(run("analyze --scenario " + assigned.string() + " --csv " + analysis.string()) == 0);
  const auto rows = lines_of(analysis);
  REQUIRE(rows.size() == 5);  // header + 3 users + total
  CHECK(rows[0] == "user,throughput,window,delta,error_bound,mode");
  CHECK(split(rows[1], ',').size() == 6);
  CHECK(rows.back().rfind("total,", 0) == 0);

  REQUIRE(run("simulate --scenario " + assigned.string() +
              " --cycles 20000 --seed 2 --csv " + sim.string()) == 0);
  const auto sim_rows = lines_of(sim);
  REQUIRE(sim_rows.size() >= 3);
  // simulated per-user means should be positive for this easy scenario
  for (std::size_t r = 1; r + 1 < sim_rows.size(); ++r)
    CHECK(std::stod(split(sim_rows[r], ',')[1]) > 0.0);
}

TEST_CASE("assign without an output path still reports to stderr") {
  TempDir dir;
  const auto scenario = dir / "scenario.json";
  REQUIRE(run("gen -M 2 -N 4 --seed 1 -o " + scenario.string()) == 0);
  const std::string cmd = cli_path() + " assign --scenario " + scenario.string() +
                          " --algorithm alg1 2>" + (dir / "err.txt").string() +
                          " >/dev/null";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const std::string err = slurp(dir / "err.txt");
  CHECK(err.find("algorithm=alg1") != std::string::npos);
  CHECK(err.find("total=") != std::string::npos);
}

TEST_CASE("invalid scenario files exit with the validation code") {
  TempDir dir;
  const auto bad = dir / "bad.json";
  {
    std::ofstream out(bad);
    out << R"({"id":"x","users":2,"channels":2,"p":[[0.5,1.5],[0.5,0.5]]})";
  }
  CHECK(run("analyze --scenario " + bad.string()) == 2);

  const auto unknown = dir / "unknown.json";
  {
    std::ofstream out(unknown);
    out << R"({"id":"x","users":1,"channels":1,"p":0.5,"surprise":1})";
  }
  CHECK(run("analyze --scenario " + unknown.string()) == 2);

  const auto garbage = dir / "garbage.json";
  {
    std::ofstream out(garbage);
    out << "not json at all {";
  }
  CHECK(run("analyze --scenario " + garbage.string()) == 2);
}

TEST_CASE("unattainable collision target exits with the window code") {
  TempDir dir;
  const auto scenario = dir / "hotspot.json";
  {
    std::ofstream out(scenario);
    // both users always contend for the single always-idle channel and the
    // collision target is unreachable at any window
    out << R"({
      "id": "hotspot",
      "users": 2,
      "channels": 1,
      "p": 1.0,
      "timing": {"epsilon_p": 1e-9},
      "assignment": {"exclusive": [[], []], "shared": [[1], [1]]}
    })";
  }
  CHECK(run("analyze --scenario " + scenario.string()) == 3);
}

TEST_CASE("oversized exhaustive searches exit with the cap code") {
  TempDir dir;
  const auto scenario = dir / "big.json";
  REQUIRE(run("gen -M 4 -N 5 --seed 6 -o " + scenario.string()) == 0);
  CHECK(run("analyze --scenario " + scenario.string() + " --algorithm brute-sum") == 4);
  CHECK(run("compare-optimal -M 3 --channels-from 7 --channels-to 7 -o " +
            (dir / "cmp.csv").string()) == 4);
}

TEST_CASE("output directory override applies to relative paths") {
  TempDir dir;
  const std::string cmd = "CRCA_OUTPUT_DIR=" + dir.path.string() + " " + cli_path() +
                          " gen -M 2 -N 3 --seed 8 -o nested.json >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(fs::exists(dir / "nested.json"));
}

TEST_CASE("sweep emits the documented schema and a consistent summary") {
  TempDir dir;
  const auto out = dir / "sweep.csv";
  const auto summary = dir / "summary.csv";
  REQUIRE(run("sweep --variable channels -M 2 --from 3 --to 4 --low 0.7 --high 0.9"
              " --realizations 3 --seed 5 --algorithms alg1,alg2,rr:1"
              " --evaluate analytic -o " + out.string() +
              " --summary " + summary.string()) == 0);
  const auto rows = lines_of(out);
  REQUIRE(rows.size() == 1 + 2 * 3 * 3);  // header + points x realizations x algorithms
  CHECK(rows[0] ==
        "variable,value,master_seed,realization,algorithm,source,window,delta,total,"
        "min,per_user,collision_prob,target_met");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto fields = split(rows[r], ',');
    REQUIRE(fields.size() >= 13);
    CHECK(fields[0] == "channels");
    CHECK(fields[5] == "analytic");
    CHECK(std::stod(fields[8]) >= std::stod(fields[9]) - 1e-12);  // total >= min
  }

  const auto sum_rows = lines_of(summary);
  REQUIRE(sum_rows.size() == 1 + 2 * 3);  // header + points x algorithms
  CHECK(sum_rows[0] == "value,algorithm,source,realizations,mean_total,mean_min");
  // each summary mean must equal the mean of its matching rows
  for (std::size_t s = 1; s < sum_rows.size(); ++s) {
    const auto sf = split(sum_rows[s], ',');
    double total_sum = 0.0;
    int count = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto rf = split(rows[r], ',');
      if (rf[1] == sf[0] && rf[4] == sf[1]) {
        total_sum += std::stod(rf[8]);
        ++count;
      }
    }
    REQUIRE(count == std::stoi(sf[3]));
    // rows carry six significant digits, so recomputation is only that close
    CHECK(std::stod(sf[4]) == doctest::Approx(total_sum / count).epsilon(1e-4));
  }
}

TEST_CASE("sweep reruns with the same seed are identical") {
  TempDir dir;
  const auto a = dir / "a.csv";
  const auto b = dir / "b.csv";
  const std::string args =
      "sweep --variable channels -M 2 --from 4 --to 4 --realizations 2 --seed 31"
      " --algorithms alg2 --evaluate simulate:2000 ";
  REQUIRE(run(args + "-o " + a.string()) == 0);
  REQUIRE(run(args + "-o " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("window sweep reports the collision curve") {
  TempDir dir;
  const auto out = dir / "windows.csv";
  REQUIRE(run("sweep --variable window -M 3 -N 6 --from 2 --to 8 --step 2"
              " --low 0.75 --high 0.9 --realizations 1 --seed 2"
              " --algorithms alg2 --evaluate analytic -o " + out.string()) == 0);
  const auto rows = lines_of(out);
  REQUIRE(rows.size() >= 5);
  double prev = 1.0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto fields = split(rows[r], ',');
    CHECK(fields[0] == "window");
    const double pc = std::stod(fields[11]);
    CHECK(pc <= prev + 1e-12);
    prev = pc;
  }
}

TEST_CASE("compare-optimal reports non-negative optimality gaps") {
  TempDir dir;
  const auto out = dir / "cmp.csv";
  REQUIRE(run("compare-optimal -M 2 --channels-from 3 --channels-to 4"
              " --realizations 2 --low 0.6 --high 0.95 --seed 12 -o " +
              out.string()) == 0);
  const auto rows = lines_of(out);
  REQUIRE(rows.size() == 1 + 2 * 2 * 2);  // header + channels x realizations x objectives
  CHECK(rows[0] == "users,channels,master_seed,realization,objective,greedy,optimal,gap");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto fields = split(rows[r], ',');
    REQUIRE(fields.size() == 8);
    const double greedy = std::stod(fields[5]);
    const double optimal = std::stod(fields[6]);
    const double gap = std::stod(fields[7]);
    CHECK(optimal >= greedy - 1e-9);
    CHECK(gap >= -1e-9);
    // gap is relative to the optimum; rows carry six significant digits
    CHECK(gap == doctest::Approx((optimal - greedy) / optimal).epsilon(1e-3));
  }
}

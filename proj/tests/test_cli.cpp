#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

// End-to-end checks of the command line surface: subcommands, file outputs
// and exit codes. The binary path is injected by the build.

namespace {

int run(const std::string& args) {
  const std::string command = std::string(ENGAGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

struct Cleanup {
  std::vector<std::string> paths;
  ~Cleanup() {
    for (const std::string& p : paths) std::remove(p.c_str());
  }
};

}  // namespace

TEST_CASE("cli end to end") {
  Cleanup cleanup;
  cleanup.paths = {"cli_inst.json",    "cli_inst.json.manifest.json",
                   "cli_periods.csv",  "cli_periods.csv.manifest.json",
                   "cli_schedule.csv", "cli_stats.csv",
                   "cli_stats.csv.manifest.json", "cli_results.csv",
                   "cli_results.csv.manifest.json", "cli_pert.json",
                   "cli_pert.json.manifest.json", "cli_coupling.csv",
                   "cli_trace.csv", "cli_bad.json"};

  SUBCASE("generate, validate, plan, simulate, compare, perturb") {
    REQUIRE(run("gen --preset synthetic --m 16 --seed 3 -o cli_inst.json") == 0);
    CHECK(exists("cli_inst.json.manifest.json"));

    CHECK(run("validate cli_inst.json") == 0);

    REQUIRE(run("plan cli_inst.json --tmin 2 -o cli_periods.csv,cli_schedule.csv "
                "--coupling cli_coupling.csv") == 0);
    const std::string periods = read_file("cli_periods.csv");
    CHECK(periods.rfind("location_id,period,table_value\n", 0) == 0);
    const std::string schedule = read_file("cli_schedule.csv");
    CHECK(schedule.rfind("round,pulled_ids\n", 0) == 0);
    CHECK(read_file("cli_coupling.csv").rfind("u,v,weight\n", 0) == 0);

    REQUIRE(run("simulate cli_inst.json --policy engage --horizon 20 --reps 4 "
                "--seed 1 -o cli_stats.csv --trace cli_trace.csv") == 0);
    const std::string stats = read_file("cli_stats.csv");
    CHECK(stats.rfind("policy,mean,ci_half_width,reps,horizon,seed\n", 0) == 0);
    CHECK(stats.find("engage,") != std::string::npos);
    CHECK(read_file("cli_trace.csv").rfind("round,reward,pulled_ids\n", 0) == 0);

    REQUIRE(run("compare cli_inst.json --budgets 2,4 --horizon 10 --reps 3 "
                "-o cli_results.csv") == 0);
    const std::string results = read_file("cli_results.csv");
    CHECK(results.rfind("budget,policy,mean,ci_half_width,reps,horizon,seed\n", 0) == 0);
    for (const char* name : {"engage", "random", "myopic", "recharging"})
      CHECK(results.find(name) != std::string::npos);

    REQUIRE(run("perturb cli_inst.json --fraction 0.2 --seed 5 -o cli_pert.json") == 0);
    CHECK(run("validate cli_pert.json") == 0);
  }

  SUBCASE("exit codes") {
    std::ofstream("cli_bad.json")
        << R"({"budget":1,"max_period":2,"locations":[{"id":0,"population":5,)"
        << R"("initial_good":2,"p_a_gb":0.5,"p_a_bg":0.2,"p_p_gb":0.1,"p_p_bg":0.1}],)"
        << R"("commute":[{"at":0,"home":0,"weight":1.0}]})";
    CHECK(run("validate cli_bad.json") == 1);          // assumption violations
    CHECK(run("validate does_not_exist.json") == 1);   // unreadable input
    CHECK(run("frobnicate") == 2);                     // unknown subcommand
    CHECK(run("gen --preset nope -o cli_inst.json") == 2);
    CHECK(run("plan") == 2);                           // missing required args
  }
}

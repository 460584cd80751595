#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"

using namespace socsim;
using namespace socsim::testing;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.profiles = fixtures_dir() / "canonical";
  spec.schedulers = {"heft"};
  spec.scales = {25, 50, 100};
  return spec;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("socsim_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("{heft} x {25, 50, 100} x 5 seeds gives 15 sorted rows") {
  const auto rows = run_experiment(small_spec(), SchedulerRegistry::with_builtins());
  REQUIRE(rows.size() == 15);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].scheduler == "heft");
    CHECK(rows[i].scale == small_spec().scales[i / 5]);
    CHECK(rows[i].seed == i % 5);
    CHECK_FALSE(rows[i].error);
    CHECK(rows[i].trace.empty());
  }
  const auto table = format_results(rows);
  CHECK(table.rfind(
            "scheduler,scale,seed,art,mean_waiting,mean_running,avg_latency,throughput_ratio,injected,completed,"
            "remaining,error\n",
            0) == 0);
  CHECK(std::ranges::count(table, '\n') == 16);
}

TEST_CASE("horizon 0 gives a no-data row") {
  auto spec = small_spec();
  spec.scales = {50};
  spec.seeds = {0};
  spec.sim_length = 0;
  const auto table = format_results(run_experiment(spec, SchedulerRegistry::with_builtins()));
  CHECK(table.substr(table.find('\n') + 1) ==
        "heft,50.000000,0,nodata,nodata,nodata,nodata,nodata,0,0,0,\n");
}

TEST_CASE("reruns and different worker counts give identical bytes") {
  auto spec = small_spec();
  spec.schedulers = {"sjf", "heft", "met", "etf"};
  spec.sim_length = 2000;
  const auto registry = SchedulerRegistry::with_builtins();
  std::vector<std::string> tables;
  std::vector<std::map<std::string, std::string>> traces;
  for (unsigned jobs : {1u, 1u, 4u}) {
    spec.jobs = jobs;
    spec.trace_dir = scratch_dir("rerun" + std::to_string(tables.size()));
    tables.push_back(format_results(run_experiment(spec, registry)));
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(*spec.trace_dir))
      files[e.path().filename().string()] = slurp(e.path());
    traces.push_back(files);
    std::filesystem::remove_all(*spec.trace_dir);
  }
  CHECK(tables[0] == tables[1]);
  CHECK(tables[0] == tables[2]);
  CHECK(traces[0].size() == 60);
  CHECK(traces[0] == traces[1]);
  CHECK(traces[0] == traces[2]);
  CHECK(traces[0].contains("heft_scale25.000000_seed3.csv"));
}

TEST_CASE("ExperimentSpec validation rejects bad inputs") {
  const auto registry = SchedulerRegistry::with_builtins();
  auto spec = small_spec();
  spec.schedulers = {"nope"};
  CHECK_THROWS_WITH_AS(run_experiment(spec, registry), doctest::Contains("valid: etf, heft, met, sjf"), ConfigError);
  spec = small_spec();
  spec.scales = {0};
  CHECK_THROWS_AS(run_experiment(spec, registry), ConfigError);
  spec = small_spec();
  spec.seeds.clear();
  CHECK_THROWS_AS(run_experiment(spec, registry), ConfigError);
  spec = small_spec();
  spec.profiles = "/nonexistent/profiles";
  CHECK_THROWS_AS(run_experiment(spec, registry), ConfigError);
}

TEST_CASE("a failing run is reported in its row without affecting the others") {
  auto registry = SchedulerRegistry::with_builtins();
  struct Broken final : Scheduler {
    std::string_view name() const override { return "broken"; }
    SchedulerDecision schedule(const Observation& obs) const override {
      SchedulerDecision d;
      for (const auto& r : obs.ready) d.assignments.push_back({r, 99});
      return d;
    }
  };
  registry.add("broken", [](const Workload&) { return std::make_unique<Broken>(); });
  auto spec = small_spec();
  spec.schedulers = {"broken", "heft"};
  spec.scales = {50};
  spec.seeds = {0, 1};
  const auto rows = run_experiment(spec, registry);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].error);
  CHECK(rows[0].error->find("unknown pe id") != std::string::npos);
  CHECK_FALSE(rows[2].error);
  CHECK(format_results(rows).find("broken,50.000000,0,nodata") != std::string::npos);
}

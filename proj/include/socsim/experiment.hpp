#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "socsim/metrics.hpp"
#include "socsim/schedulers.hpp"

namespace socsim {

struct ExperimentSpec {
  std::filesystem::path profiles;
  std::vector<std::string> schedulers{"sjf", "met", "etf", "heft"};
  std::vector<double> scales{25, 50, 100, 250, 500};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  Tick sim_length = 5000;
  int queue_capacity = 3;
  bool pss = true;
  Tick warmup_ticks = 0;
  bool drop_when_full = false;
  std::optional<std::filesystem::path> trace_dir;
  TraceFormat trace_format = TraceFormat::csv;
  std::optional<std::filesystem::path> out;
  unsigned jobs = 1;

  /// Throws ConfigError for empty lists or missing files.
  void validate(const SchedulerRegistry& registry) const;
  GeneratorConfig generator(double scale, std::uint64_t seed) const;
};

struct RunResult {
  std::string scheduler;
  double scale = 0;
  std::uint64_t seed = 0;
  RunStats stats;
  std::vector<TraceRecord> trace;
  std::optional<std::string> error;
};

/// One reset/step loop with the given scheduler until the episode is done.
RunResult run_single(const Workload& workload, const Scheduler& scheduler, const GeneratorConfig& config);

/// Every (scheduler, scale, seed) combination, up to spec.jobs at a time.
/// Rows come back sorted by (scheduler, scale, seed). Traces are written to
/// spec.trace_dir when set and then dropped from the returned rows.
std::vector<RunResult> run_experiment(const ExperimentSpec& spec, const SchedulerRegistry& registry);

/// Results table (CSV) with a header row; missing statistics print as "nodata".
std::string format_results(const std::vector<RunResult>& rows);

std::string format_number(double v);
std::string trace_file_name(const std::string& scheduler, double scale, std::uint64_t seed, TraceFormat format);

}  // namespace socsim

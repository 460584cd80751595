#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socsim/kernel.hpp"

namespace socsim {

/// Timing of one completed task, reconstructed from a trace.
struct TaskRecord {
  JobId job = 0;
  TaskId task = 0;
  PeId pe = 0;
  Tick ready_time = 0;
  Tick exec_start = 0;
  Tick exec_finish = 0;

  Tick waiting() const { return exec_start - ready_time; }
  Tick running() const { return exec_finish - exec_start; }
  Tick response() const { return exec_finish - ready_time; }
};

struct ResponseTime {
  double art = 0.0;
  double mean_waiting = 0.0;
  double mean_running = 0.0;
  std::size_t tasks = 0;
};

struct JobCounts {
  std::size_t injected = 0;
  std::size_t completed = 0;
  std::size_t remaining = 0;

  bool operator==(const JobCounts&) const = default;
};

struct RunStats {
  std::optional<ResponseTime> response;   // empty: no counted tasks
  std::optional<double> avg_latency;      // empty: no counted completed jobs
  std::optional<double> throughput_ratio; // completed jobs / cumulative exec time
  JobCounts counts;
  std::vector<TaskRecord> tasks;          // counted tasks
};

/// Counted tasks: completed tasks of jobs injected at or after warmup.
std::vector<TaskRecord> counted_tasks(std::span<const TraceRecord> trace, Tick warmup);

/// Mean ready-to-completion time with its waiting/running split.
std::optional<ResponseTime> average_response_time(std::span<const TraceRecord> trace, Tick warmup);
/// Mean injection-to-completion time over counted completed jobs.
std::optional<double> average_latency(std::span<const TraceRecord> trace, Tick warmup);
JobCounts job_counts(std::span<const TraceRecord> trace, Tick warmup);
std::optional<double> throughput_ratio(std::span<const TraceRecord> trace, Tick warmup);

RunStats compute_stats(std::span<const TraceRecord> trace, Tick warmup);

enum class TraceFormat { csv, jsonl };

TraceFormat trace_format_from_string(const std::string& s);

/// CSV columns: tick,job,task,from,to,pe,start. Creation rows use "-" as the
/// from-state; pe and start are empty when unset.
void write_trace(std::ostream& out, std::span<const TraceRecord> trace, TraceFormat format);
/// Reads either format back; throws std::runtime_error on malformed input.
std::vector<TraceRecord> read_trace(std::istream& in, TraceFormat format);

}  // namespace socsim

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "socsim/env.hpp"

namespace socsim {

/// Scheduler plugin contract: a decision for the ready tasks in an
/// observation. Built-ins are pure functions of the observation.
class Scheduler {
public:
  virtual ~Scheduler() = default;
  virtual std::string_view name() const = 0;
  virtual SchedulerDecision schedule(const Observation& obs) const = 0;
};

/// Upward ranks kept exactly as rank * num_pes, which is always an integer.
struct UpwardRanks {
  int num_pes = 1;
  std::vector<std::int64_t> scaled;  // parallel to graph.tasks()

  double operator[](std::size_t index) const { return static_cast<double>(scaled[index]) / num_pes; }
  std::map<TaskId, double> by_id(const TaskGraph& graph) const;
};

UpwardRanks rank_upward(const TaskGraph& graph, const ResourceProfile& resources);

struct Interval {
  Tick begin = 0;
  Tick end = 0;
};

/// Earliest [start, start + exec) with start >= data_ready that does not
/// overlap any busy interval. `busy` must be sorted and non-overlapping.
std::pair<Tick, Tick> eft_with_insertion(Tick exec, std::span<const Interval> busy, Tick data_ready);

struct PlannedTask {
  TaskId task = 0;
  PeId pe = 0;
  Tick start = 0;
  Tick finish = 0;
};

struct StaticSchedule {
  std::vector<PlannedTask> placements;  // in rank order
  Tick makespan = 0;
};

/// Classic whole-graph HEFT: rank order, insertion-based EFT, ties to the
/// lower PE id.
StaticSchedule static_heft(const TaskGraph& graph, const ResourceProfile& resources);

/// Earliest tick the inputs of a ready task are all present on `pe`.
Tick data_ready_time(const Observation& obs, const TaskRef& ref, PeId pe);

SchedulerDecision schedule_met(const Observation& obs);
SchedulerDecision schedule_sjf(const Observation& obs);
SchedulerDecision schedule_etf(const Observation& obs);

/// Rank lookup for HEFT; graphs missing from the table are ranked on demand.
using RankTable = std::map<const TaskGraph*, UpwardRanks>;
SchedulerDecision schedule_heft(const Observation& obs, const RankTable& ranks = {});

/// Name -> factory. Built-ins are registered by with_builtins(); external code
/// may add more (e.g. a learned policy).
class SchedulerRegistry {
public:
  using Factory = std::function<std::unique_ptr<Scheduler>(const Workload&)>;

  static SchedulerRegistry with_builtins();

  void add(std::string name, Factory factory);
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;
  /// Throws ConfigError listing the valid names.
  std::unique_ptr<Scheduler> create(std::string_view name, const Workload& workload) const;

private:
  std::map<std::string, Factory, std::less<>> factories_;
};

}  // namespace socsim

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "socsim/kernel.hpp"

namespace socsim {

inline constexpr const char* kVersion = "1.0.0";

struct TaskView {
  TaskId id = 0;
  TaskState state = TaskState::outstanding;
  std::optional<PeId> pe;
  std::optional<Tick> ready_time;
  std::optional<Tick> exec_start;
  std::optional<Tick> exec_finish;

  bool operator==(const TaskView&) const = default;
};

struct JobView {
  JobId id = 0;
  std::size_t profile = 0;
  std::shared_ptr<const TaskGraph> graph;
  Tick inject_time = 0;
  std::vector<TaskView> tasks;  // parallel to graph->tasks()

  const TaskView& task(TaskId id) const { return tasks[graph->index_of(id)]; }
  bool operator==(const JobView& o) const {
    return id == o.id && profile == o.profile && graph == o.graph && inject_time == o.inject_time && tasks == o.tasks;
  }
};

/// Read-only statistics taken from the world when the observation was made.
struct StorageSnapshot {
  Tick clock = 0;
  Tick horizon = 0;
  std::size_t num_outstanding = 0;
  std::size_t num_ready = 0;
  std::size_t num_executable = 0;
  std::size_t num_running = 0;
  std::size_t num_completed = 0;
  std::size_t injected_jobs = 0;
  std::vector<Tick> busy_until;              // per PE
  std::vector<std::vector<Tick>> slot_free;  // per PE, per slot
  std::vector<CompletedJob> completed_jobs;

  bool operator==(const StorageSnapshot&) const = default;
};

struct Observation {
  std::vector<JobView> job_dags;  // live jobs, ascending id
  std::vector<TaskRef> ready;     // ready-list order
  std::vector<Assignment> action_map;  // ready x PEs
  StorageSnapshot env_storage;
  std::shared_ptr<const ResourceProfile> pes;

  /// Throws std::out_of_range for an id that is not live.
  const JobView& job(JobId id) const;
  bool operator==(const Observation&) const = default;
};

/// Assignments in dispatch order. Empty means no-action.
struct SchedulerDecision {
  std::vector<Assignment> assignments;

  bool operator==(const SchedulerDecision&) const = default;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  std::map<std::string, double> info;
};

Observation get_observation(const World& world);

nlohmann::json to_json(const Observation& obs);
/// Canonical text form of an observation (sorted keys, no whitespace).
std::string serialize_observation(const Observation& obs);

/// Decision wire format: [[job_instance_id, task_id, pe_id], ...]. Throws
/// SimulationError for anything that is not a list of integer triples.
SchedulerDecision decision_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SchedulerDecision& decision);

/// reset/step facade over one World.
class Environment {
public:
  Environment(Workload workload, GeneratorConfig config);

  /// Fresh world, optional PSS prefill, run to the first decision point.
  Observation reset();

  /// Dispatches the decision (empty = no-action) and runs to the next
  /// decision point. The reward is minus the summed duration of counted jobs
  /// (injected at or after warm-up) that completed during this step.
  StepResult step(const SchedulerDecision& decision);

  Observation observation() const { return get_observation(world()); }
  bool done() const { return world().done(); }
  const World& world() const;
  const GeneratorConfig& config() const { return config_; }
  const Workload& workload() const { return workload_; }

private:
  Workload workload_;
  GeneratorConfig config_;
  std::optional<World> world_;
};

}  // namespace socsim

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "socsim/jobgen.hpp"
#include "socsim/profiles.hpp"

namespace socsim {

enum class TaskState : std::uint8_t { outstanding, ready, executable, running, completed };

std::string_view to_string(TaskState s);
/// Inverse of to_string; throws std::invalid_argument.
TaskState task_state_from_string(std::string_view s);

struct TaskRef {
  JobId job = 0;
  TaskId task = 0;

  auto operator<=>(const TaskRef&) const = default;
};

std::string to_string(const TaskRef& ref);

/// One (task instance, PE) pairing.
struct Assignment {
  TaskRef task;
  PeId pe = 0;

  bool operator==(const Assignment&) const = default;
};

/// Rejected dispatches and other illegal operations on a world. The world is
/// left unchanged when this is thrown from dispatch().
class SimulationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct TaskInstance {
  JobId job = 0;
  TaskId task_id = 0;
  std::size_t index = 0;  // position in the owning graph
  TaskState state = TaskState::outstanding;
  std::optional<Tick> ready_time;
  std::optional<PeId> assigned_pe;
  Tick data_ready = 0;             // earliest tick all inputs are present on assigned_pe
  std::optional<Tick> run_since;   // tick the PE slot was claimed
  std::optional<Tick> exec_start;  // first tick of actual execution (after input transfer)
  std::optional<Tick> exec_finish;
};

struct JobInstance {
  JobId id = 0;
  std::size_t profile = 0;
  std::shared_ptr<const TaskGraph> graph;
  Tick inject_time = 0;
  std::vector<TaskInstance> tasks;  // parallel to graph->tasks()
  std::size_t num_completed = 0;
  std::optional<Tick> finish_time;
};

struct CompletedJob {
  JobId job = 0;
  Tick inject_time = 0;
  Tick finish_time = 0;

  Tick duration() const { return finish_time - inject_time; }
  bool operator==(const CompletedJob&) const = default;
};

/// Zero cost when both ends run on the same PE.
Tick comm_delay(PeId pred_pe, PeId succ_pe, Tick edge_cost);

enum class EventKind : std::uint8_t { job_arrival = 0, task_finish = 1, schedule_point = 2 };

struct Event {
  Tick time = 0;
  EventKind kind = EventKind::job_arrival;
  std::uint64_t seq = 0;
  TaskRef task;  // task_finish only
};

/// Min-queue on (time, kind, insertion order).
class EventQueue {
public:
  void push(Tick time, EventKind kind, TaskRef task = {});
  const Event& top() const { return heap_.top(); }
  Event pop();
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return std::tie(a.time, a.kind, a.seq) > std::tie(b.time, b.kind, b.seq);
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

/// One state transition. `from` is empty for task creation; `exec_start` is
/// set on transitions into running.
struct TraceRecord {
  Tick tick = 0;
  JobId job = 0;
  TaskId task = 0;
  std::optional<TaskState> from;
  TaskState to = TaskState::outstanding;
  std::optional<PeId> pe;
  std::optional<Tick> exec_start;

  bool operator==(const TraceRecord&) const = default;
};

/// The mutable simulation state: clock, the five task lists, the job queue,
/// per-PE execution queues and the completed-job log. Single-threaded.
class World {
public:
  /// Empty world at tick 0. In non-PSS mode the first arrival is already
  /// queued; in PSS mode call prefill_pss() before advancing.
  World(Workload workload, GeneratorConfig config);

  Tick now() const { return now_; }
  Tick horizon() const { return config_.sim_length; }
  bool done() const { return done_; }
  const GeneratorConfig& config() const { return config_; }
  const Workload& workload() const { return workload_; }

  const std::vector<TaskRef>& outstanding() const { return lists_[0]; }
  const std::vector<TaskRef>& ready() const { return lists_[1]; }
  const std::vector<TaskRef>& executable() const { return lists_[2]; }
  const std::vector<TaskRef>& running() const { return lists_[3]; }
  const std::vector<TaskRef>& completed() const { return lists_[4]; }
  const std::vector<TaskRef>& list(TaskState s) const { return lists_[static_cast<std::size_t>(s)]; }

  /// Every job ever injected, keyed by id.
  const std::map<JobId, JobInstance>& jobs() const { return jobs_; }
  const JobQueue& job_queue() const { return queue_; }
  const std::vector<CompletedJob>& completed_jobs() const { return completed_jobs_; }
  const TaskInstance& task(const TaskRef& ref) const;
  const std::vector<TraceRecord>& trace() const { return trace_; }

  std::size_t injected_jobs() const { return jobs_.size(); }
  std::size_t dropped_arrivals() const { return dropped_; }
  /// Ticks at which arrival events fired, in order.
  const std::vector<Tick>& arrival_times() const { return arrival_times_; }

  /// Per PE, per slot: the tick each slot becomes free if nothing else is
  /// dispatched (running tasks plus the FIFO executable backlog).
  std::vector<std::vector<Tick>> slot_free_times() const;
  /// Per PE: the tick the whole backlog drains.
  std::vector<Tick> busy_until() const;

  /// Moves every outstanding task whose predecessors are all completed to the
  /// ready list. Returns how many moved.
  std::size_t release_ready_tasks();

  /// Validates every assignment first, then applies them in order.
  void dispatch(std::span<const Assignment> assignments);

  /// Applies events until a decision point (ready list non-empty) or the end
  /// of the episode. With require_progress the clock must move past its
  /// current tick before a decision point is reported. Returns the
  /// completed-job records produced while advancing.
  std::vector<CompletedJob> advance(bool require_progress = false);

  /// Arrival handling. inject_job() instantiates a uniformly chosen profile
  /// at the current tick; it requires a free queue slot.
  JobId inject_job();
  /// Fills the queue to capacity at tick 0 and samples the next arrival from 0.
  void prefill_pss();

  /// Queues a decision point at `at` (schedule_point event).
  void schedule_wakeup(Tick at);

  /// Returns a description of every violated structural invariant.
  std::vector<std::string> check_invariants() const;

private:
  TaskInstance& task_mut(const TaskRef& ref);
  void set_state(TaskInstance& t, TaskState to, std::optional<Tick> exec_start = std::nullopt);
  void record(const TaskInstance& t, std::optional<TaskState> from, std::optional<Tick> exec_start);
  void start_queued(PeId pe);
  void process_batch(Tick t, std::vector<CompletedJob>& finished);
  void on_arrival();
  void on_queue_slot_freed();
  void on_task_finish(const TaskRef& ref, std::vector<CompletedJob>& finished);
  Tick compute_data_ready(const TaskInstance& t, PeId pe) const;

  Workload workload_;
  GeneratorConfig config_;
  ArrivalStreams streams_;
  Tick now_ = 0;
  bool done_ = false;
  std::array<std::vector<TaskRef>, 5> lists_;
  std::map<JobId, JobInstance> jobs_;
  JobId next_job_id_ = 0;
  JobQueue queue_;
  bool deferred_arrival_ = false;
  std::size_t dropped_ = 0;
  std::vector<Tick> arrival_times_;
  std::vector<CompletedJob> completed_jobs_;
  EventQueue events_;
  std::vector<int> running_on_pe_;
  std::vector<std::deque<TaskRef>> pe_backlog_;
  std::vector<TraceRecord> trace_;
};

}  // namespace socsim

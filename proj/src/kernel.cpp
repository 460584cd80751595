#include "socsim/kernel.hpp"

#include <algorithm>
#include <set>

namespace socsim {

namespace {

constexpr std::array<std::string_view, 5> kStateNames{"outstanding", "ready", "executable", "running", "completed"};

std::size_t slot(TaskState s) { return static_cast<std::size_t>(s); }

void erase_ref(std::vector<TaskRef>& list, const TaskRef& ref) {
  auto it = std::ranges::find(list, ref);
  if (it != list.end()) {
    list.erase(it);
  }
}

}  // namespace

std::string_view to_string(TaskState s) { return kStateNames[slot(s)]; }

TaskState task_state_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == s) {
      return static_cast<TaskState>(i);
    }
  }
  throw std::invalid_argument("unknown task state '" + std::string(s) + "'");
}

std::string to_string(const TaskRef& ref) {
  return "(job " + std::to_string(ref.job) + ", task " + std::to_string(ref.task) + ")";
}

Tick comm_delay(PeId pred_pe, PeId succ_pe, Tick edge_cost) { return pred_pe == succ_pe ? 0 : edge_cost; }

void EventQueue::push(Tick time, EventKind kind, TaskRef task) { heap_.push(Event{time, kind, next_seq_++, task}); }

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  return e;
}

World::World(Workload workload, GeneratorConfig config)
    : workload_(std::move(workload)), config_(config), streams_(config.seed) {
  config_.validate();
  if (workload_.jobs.empty() || !workload_.resources) {
    throw ConfigError("workload needs at least one job profile and a resource profile");
  }
  const auto num_pes = static_cast<std::size_t>(workload_.resources->num_pes());
  running_on_pe_.assign(num_pes, 0);
  pe_backlog_.assign(num_pes, {});
  queue_.capacity = config_.queue_capacity;
  if (!config_.pss && config_.sim_length > 0) {
    events_.push(streams_.next_interarrival(config_.scale), EventKind::job_arrival);
  }
}

const TaskInstance& World::task(const TaskRef& ref) const {
  auto it = jobs_.find(ref.job);
  if (it == jobs_.end()) {
    throw SimulationError("unknown job instance " + std::to_string(ref.job));
  }
  const auto& graph = *it->second.graph;
  std::size_t index = 0;
  try {
    index = graph.index_of(ref.task);
  } catch (const std::out_of_range&) {
    throw SimulationError("unknown task " + to_string(ref));
  }
  return it->second.tasks[index];
}

TaskInstance& World::task_mut(const TaskRef& ref) { return const_cast<TaskInstance&>(std::as_const(*this).task(ref)); }

void World::record(const TaskInstance& t, std::optional<TaskState> from, std::optional<Tick> exec_start) {
  trace_.push_back(TraceRecord{now_, t.job, t.task_id, from, t.state, t.assigned_pe, exec_start});
}

void World::set_state(TaskInstance& t, TaskState to, std::optional<Tick> exec_start) {
  const TaskState from = t.state;
  const TaskRef ref{t.job, t.task_id};
  erase_ref(lists_[slot(from)], ref);
  t.state = to;
  auto& dest = lists_[slot(to)];
  if (to == TaskState::ready) {
    dest.insert(std::ranges::upper_bound(dest, ref), ref);
  } else {
    dest.push_back(ref);
  }
  record(t, from, exec_start);
}

void World::schedule_wakeup(Tick at) {
  if (at < now_) {
    throw SimulationError("wake-up tick " + std::to_string(at) + " is in the past");
  }
  events_.push(at, EventKind::schedule_point);
}

std::size_t World::release_ready_tasks() {
  std::vector<TaskRef> newly;
  for (const auto& ref : outstanding()) {
    const auto& job = jobs_.at(ref.job);
    const auto& t = job.tasks[job.graph->index_of(ref.task)];
    const auto& preds = job.graph->predecessors(t.index);
    if (std::ranges::all_of(preds, [&](const auto& e) { return job.tasks[e.first].state == TaskState::completed; })) {
      newly.push_back(ref);
    }
  }
  std::ranges::sort(newly);
  for (const auto& ref : newly) {
    auto& t = task_mut(ref);
    t.ready_time = now_;
    set_state(t, TaskState::ready);
  }
  return newly.size();
}

Tick World::compute_data_ready(const TaskInstance& t, PeId pe) const {
  const auto& job = jobs_.at(t.job);
  Tick ready = t.ready_time.value_or(now_);
  for (auto [pi, cost] : job.graph->predecessors(t.index)) {
    const auto& pred = job.tasks[pi];
    ready = std::max(ready, *pred.exec_finish + comm_delay(*pred.assigned_pe, pe, cost));
  }
  return ready;
}

void World::dispatch(std::span<const Assignment> assignments) {
  if (done_) {
    throw SimulationError("episode is done");
  }
  std::set<TaskRef> seen;
  for (const auto& a : assignments) {
    const std::string pair = to_string(a.task) + " -> pe " + std::to_string(a.pe);
    if (a.pe < 0 || a.pe >= workload_.resources->num_pes()) {
      throw SimulationError("invalid assignment " + pair + ": unknown pe id");
    }
    const TaskInstance* t = nullptr;
    try {
      t = &task(a.task);
    } catch (const SimulationError&) {
      throw SimulationError("invalid assignment " + pair + ": unknown task");
    }
    if (t->state != TaskState::ready) {
      throw SimulationError("invalid assignment " + pair + ": task is " + std::string(to_string(t->state)) +
                            ", not ready");
    }
    if (!seen.insert(a.task).second) {
      throw SimulationError("invalid assignment " + pair + ": task assigned twice");
    }
  }
  for (const auto& a : assignments) {
    auto& t = task_mut(a.task);
    t.assigned_pe = a.pe;
    t.data_ready = compute_data_ready(t, a.pe);
    set_state(t, TaskState::executable);
    pe_backlog_[a.pe].push_back(a.task);
    start_queued(a.pe);
  }
}

void World::start_queued(PeId pe) {
  const int capacity = workload_.resources->pes[pe].capacity;
  auto& backlog = pe_backlog_[pe];
  while (running_on_pe_[pe] < capacity && !backlog.empty()) {
    auto ref = backlog.front();
    backlog.pop_front();
    auto& t = task_mut(ref);
    const auto& job = jobs_.at(ref.job);
    t.run_since = now_;
    t.exec_start = std::max(now_, t.data_ready);
    t.exec_finish = *t.exec_start + job.graph->tasks()[t.index].exec_time[pe];
    ++running_on_pe_[pe];
    set_state(t, TaskState::running, t.exec_start);
    events_.push(*t.exec_finish, EventKind::task_finish, ref);
  }
}

void World::on_task_finish(const TaskRef& ref, std::vector<CompletedJob>& finished) {
  auto& t = task_mut(ref);
  const PeId pe = *t.assigned_pe;
  set_state(t, TaskState::completed);
  --running_on_pe_[pe];
  start_queued(pe);

  auto& job = jobs_.at(ref.job);
  if (++job.num_completed == job.tasks.size()) {
    job.finish_time = now_;
    CompletedJob done{job.id, job.inject_time, now_};
    completed_jobs_.push_back(done);
    finished.push_back(done);
    std::erase(queue_.live_jobs, job.id);
    on_queue_slot_freed();
  } else {
    release_ready_tasks();
  }
}

void World::process_batch(Tick t, std::vector<CompletedJob>& finished) {
  while (!events_.empty() && events_.top().time == t) {
    const Event e = events_.pop();
    switch (e.kind) {
      case EventKind::job_arrival:
        on_arrival();
        break;
      case EventKind::task_finish:
        on_task_finish(e.task, finished);
        break;
      case EventKind::schedule_point:
        break;
    }
  }
}

std::vector<CompletedJob> World::advance(bool require_progress) {
  std::vector<CompletedJob> finished;
  if (done_) {
    return finished;
  }
  const Tick start = now_;
  const Tick horizon = config_.sim_length;
  while (true) {
    if (now_ >= horizon) {
      done_ = true;
      break;
    }
    if (!events_.empty() && events_.top().time == now_) {
      process_batch(now_, finished);
      continue;
    }
    if (!ready().empty() && (!require_progress || now_ > start)) {
      break;
    }
    if (events_.empty()) {
      // Nothing can change any more: either the world is idle for good, or
      // the agent keeps deferring the remaining ready tasks.
      if (!ready().empty()) {
        now_ = horizon;
      }
      done_ = true;
      break;
    }
    const Tick next = events_.top().time;
    if (next >= horizon) {
      now_ = horizon;
      done_ = true;
      break;
    }
    now_ = next;
    process_batch(now_, finished);
  }
  return finished;
}

std::vector<std::vector<Tick>> World::slot_free_times() const {
  const auto& pes = workload_.resources->pes;
  std::vector<std::vector<Tick>> slots(pes.size());
  for (std::size_t p = 0; p < pes.size(); ++p) {
    slots[p].assign(static_cast<std::size_t>(pes[p].capacity), now_);
  }
  std::vector<std::size_t> used(pes.size(), 0);
  for (const auto& ref : running()) {
    const auto& t = task(ref);
    const auto p = static_cast<std::size_t>(*t.assigned_pe);
    slots[p][used[p]++] = *t.exec_finish;
  }
  for (std::size_t p = 0; p < pes.size(); ++p) {
    for (const auto& ref : pe_backlog_[p]) {
      const auto& t = task(ref);
      auto earliest = std::ranges::min_element(slots[p]);
      const Tick start = std::max(*earliest, t.data_ready);
      *earliest = start + jobs_.at(ref.job).graph->tasks()[t.index].exec_time[p];
    }
  }
  return slots;
}

std::vector<Tick> World::busy_until() const {
  std::vector<Tick> out;
  for (const auto& slots : slot_free_times()) {
    out.push_back(*std::ranges::max_element(slots));
  }
  return out;
}

std::vector<std::string> World::check_invariants() const {
  std::vector<std::string> problems;
  std::map<TaskRef, int> membership;
  for (std::size_t s = 0; s < lists_.size(); ++s) {
    for (const auto& ref : lists_[s]) {
      ++membership[ref];
      const auto& t = task(ref);
      if (slot(t.state) != s) {
        problems.push_back(to_string(ref) + " is in the " + std::string(kStateNames[s]) + " list but its state is " +
                           std::string(to_string(t.state)));
      }
    }
  }
  std::vector<int> running(running_on_pe_.size(), 0);
  for (const auto& [id, job] : jobs_) {
    std::size_t completed = 0;
    for (const auto& t : job.tasks) {
      const TaskRef ref{t.job, t.task_id};
      if (membership[ref] != 1) {
        problems.push_back(to_string(ref) + " appears in " + std::to_string(membership[ref]) + " lists");
      }
      const bool assigned = t.state == TaskState::executable || t.state == TaskState::running ||
                            t.state == TaskState::completed;
      if (assigned != t.assigned_pe.has_value()) {
        problems.push_back(to_string(ref) + " has assigned_pe inconsistent with state " +
                           std::string(to_string(t.state)));
      }
      if (t.state == TaskState::running) {
        ++running[static_cast<std::size_t>(*t.assigned_pe)];
      }
      if (t.state == TaskState::completed) {
        ++completed;
        if (*t.exec_finish - *t.exec_start != job.graph->tasks()[t.index].exec_time[*t.assigned_pe]) {
          problems.push_back(to_string(ref) + " ran for the wrong duration");
        }
      }
      if (t.exec_start && (*t.exec_start < *t.ready_time || *t.exec_start < *t.run_since)) {
        problems.push_back(to_string(ref) + " started before it was ready");
      }
      if (t.exec_start) {
        for (auto [pi, cost] : job.graph->predecessors(t.index)) {
          const auto& pred = job.tasks[pi];
          if (!pred.exec_finish ||
              *t.exec_start < *pred.exec_finish + comm_delay(*pred.assigned_pe, *t.assigned_pe, cost)) {
            problems.push_back(to_string(ref) + " started before its inputs arrived");
          }
        }
      }
    }
    if (completed != job.num_completed) {
      problems.push_back("job " + std::to_string(id) + " completion count mismatch");
    }
  }
  std::size_t listed = 0;
  for (const auto& l : lists_) {
    listed += l.size();
  }
  std::size_t injected_tasks = 0;
  for (const auto& [id, job] : jobs_) {
    injected_tasks += job.tasks.size();
  }
  if (listed != injected_tasks) {
    problems.push_back("task conservation violated: " + std::to_string(listed) + " listed vs " +
                       std::to_string(injected_tasks) + " injected");
  }
  const auto& pes = workload_.resources->pes;
  for (std::size_t p = 0; p < pes.size(); ++p) {
    if (running[p] != running_on_pe_[p] || running[p] > pes[p].capacity) {
      problems.push_back("pe " + std::to_string(p) + " capacity violated");
    }
  }
  for (const auto& c : completed_jobs_) {
    if (c.finish_time < c.inject_time) {
      problems.push_back("job " + std::to_string(c.job) + " finished before it was injected");
    }
  }
  if (static_cast<int>(queue_.live_jobs.size()) > queue_.capacity) {
    problems.push_back("job queue over capacity");
  }
  if (queue_.live_jobs.size() + completed_jobs_.size() != jobs_.size()) {
    problems.push_back("job conservation violated");
  }
  return problems;
}

}  // namespace socsim

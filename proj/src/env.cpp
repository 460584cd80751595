#include "socsim/env.hpp"

#include <algorithm>

namespace socsim {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

const JobView& Observation::job(JobId id) const {
  auto it = std::ranges::lower_bound(job_dags, id, {}, &JobView::id);
  if (it == job_dags.end() || it->id != id) {
    throw std::out_of_range("job instance " + std::to_string(id) + " is not live");
  }
  return *it;
}

Observation get_observation(const World& world) {
  Observation obs;
  for (JobId id : world.job_queue().live_jobs) {
    const auto& job = world.jobs().at(id);
    JobView view{job.id, job.profile, job.graph, job.inject_time, {}};
    view.tasks.reserve(job.tasks.size());
    for (const auto& t : job.tasks) {
      view.tasks.push_back(TaskView{t.task_id, t.state, t.assigned_pe, t.ready_time, t.exec_start, t.exec_finish});
    }
    obs.job_dags.push_back(std::move(view));
  }
  std::ranges::sort(obs.job_dags, {}, &JobView::id);

  obs.ready = world.ready();
  const int num_pes = world.workload().resources->num_pes();
  obs.action_map.reserve(obs.ready.size() * static_cast<std::size_t>(num_pes));
  for (const auto& ref : obs.ready) {
    for (PeId p = 0; p < num_pes; ++p) {
      obs.action_map.push_back({ref, p});
    }
  }

  auto& s = obs.env_storage;
  s.clock = world.now();
  s.horizon = world.horizon();
  s.num_outstanding = world.outstanding().size();
  s.num_ready = world.ready().size();
  s.num_executable = world.executable().size();
  s.num_running = world.running().size();
  s.num_completed = world.completed().size();
  s.injected_jobs = world.injected_jobs();
  s.slot_free = world.slot_free_times();
  for (const auto& slots : s.slot_free) {
    s.busy_until.push_back(*std::ranges::max_element(slots));
  }
  s.completed_jobs = world.completed_jobs();
  obs.pes = world.workload().resources;
  return obs;
}

json to_json(const Observation& obs) {
  json jobs = json::array();
  for (const auto& job : obs.job_dags) {
    json tasks = json::array();
    const auto& nodes = job.graph->tasks();
    for (std::size_t i = 0; i < job.tasks.size(); ++i) {
      const auto& t = job.tasks[i];
      json preds = json::array();
      for (const auto& p : nodes[i].predecessors) {
        preds.push_back({p.task, p.comm});
      }
      tasks.push_back({{"id", t.id},
                       {"state", to_string(t.state)},
                       {"pe", optional_json(t.pe)},
                       {"ready_time", optional_json(t.ready_time)},
                       {"exec_start", optional_json(t.exec_start)},
                       {"exec_finish", optional_json(t.exec_finish)},
                       {"exec_time", nodes[i].exec_time},
                       {"predecessors", preds}});
    }
    jobs.push_back({{"id", job.id},
                    {"profile", job.profile},
                    {"name", job.graph->name()},
                    {"inject_time", job.inject_time},
                    {"tasks", tasks}});
  }
  json ready = json::array();
  for (const auto& r : obs.ready) {
    ready.push_back({r.job, r.task});
  }
  json action_map = json::array();
  for (const auto& a : obs.action_map) {
    action_map.push_back({a.task.job, a.task.task, a.pe});
  }
  const auto& s = obs.env_storage;
  json completed = json::array();
  for (const auto& c : s.completed_jobs) {
    completed.push_back({c.job, c.inject_time, c.finish_time});
  }
  json storage = {{"clock", s.clock},
                  {"horizon", s.horizon},
                  {"outstanding", s.num_outstanding},
                  {"ready", s.num_ready},
                  {"executable", s.num_executable},
                  {"running", s.num_running},
                  {"completed", s.num_completed},
                  {"injected_jobs", s.injected_jobs},
                  {"busy_until", s.busy_until},
                  {"slot_free", s.slot_free},
                  {"completed_jobs", completed}};
  json pes = json::array();
  for (const auto& pe : obs.pes->pes) {
    pes.push_back({{"id", pe.id}, {"name", pe.name}, {"capacity", pe.capacity}});
  }
  return {{"version", kVersion},
          {"job_dags", jobs},
          {"ready", ready},
          {"action_map", action_map},
          {"env_storage", storage},
          {"pes", pes}};
}

std::string serialize_observation(const Observation& obs) { return to_json(obs).dump(); }

SchedulerDecision decision_from_json(const json& doc) {
  if (!doc.is_array()) {
    throw SimulationError("malformed action: expected a list of [job, task, pe] triples");
  }
  SchedulerDecision out;
  for (const auto& item : doc) {
    if (!item.is_array() || item.size() != 3 ||
        !std::ranges::all_of(item, [](const json& v) { return v.is_number_integer(); })) {
      throw SimulationError("malformed action triple " + item.dump());
    }
    out.assignments.push_back({{item[0].get<JobId>(), item[1].get<TaskId>()}, item[2].get<PeId>()});
  }
  return out;
}

json to_json(const SchedulerDecision& decision) {
  json out = json::array();
  for (const auto& a : decision.assignments) {
    out.push_back({a.task.job, a.task.task, a.pe});
  }
  return out;
}

Environment::Environment(Workload workload, GeneratorConfig config)
    : workload_(std::move(workload)), config_(config) {
  config_.validate();
  if (workload_.jobs.empty() || !workload_.resources) {
    throw ConfigError("no job profiles loaded");
  }
}

const World& Environment::world() const {
  if (!world_) {
    throw SimulationError("environment has not been reset");
  }
  return *world_;
}

Observation Environment::reset() {
  world_.emplace(workload_, config_);
  if (config_.pss && config_.sim_length > 0) {
    world_->prefill_pss();
  }
  world_->advance();
  return get_observation(*world_);
}

StepResult Environment::step(const SchedulerDecision& decision) {
  if (!world_) {
    throw SimulationError("environment has not been reset");
  }
  if (world_->done()) {
    throw SimulationError("step called after the episode is done");
  }
  world_->dispatch(decision.assignments);
  const auto finished = world_->advance(decision.assignments.empty());

  Tick total = 0;
  std::size_t counted = 0;
  for (const auto& job : finished) {
    if (job.inject_time >= config_.warmup_ticks) {
      total += job.duration();
      ++counted;
    }
  }
  StepResult out;
  out.observation = get_observation(*world_);
  out.reward = -static_cast<double>(total);
  out.done = world_->done();
  out.info = {{"clock", static_cast<double>(world_->now())},
              {"assignments", static_cast<double>(decision.assignments.size())},
              {"completed_jobs", static_cast<double>(counted)}};
  return out;
}

}  // namespace socsim

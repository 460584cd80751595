#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "socsim/experiment.hpp"

namespace socsim::testing {

inline std::filesystem::path fixtures_dir() { return SOCSIM_FIXTURES_DIR; }

inline Workload canonical() { return load_workload(fixtures_dir() / "canonical"); }

inline std::shared_ptr<const ResourceProfile> make_pes(std::vector<int> capacities) {
  ResourceProfile r;
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    r.pes.push_back({static_cast<PeId>(i), "PE" + std::to_string(i), capacities[i], {}});
  }
  return std::make_shared<const ResourceProfile>(std::move(r));
}

/// Task description: {id, exec per PE, {(pred, comm)...}}.
struct Spec {
  TaskId id;
  std::vector<Tick> exec;
  std::vector<Predecessor> preds = {};
};

inline std::shared_ptr<const TaskGraph> make_graph(const std::vector<Spec>& specs, std::string name = "g") {
  std::vector<TaskNode> nodes;
  int pes = 0;
  for (const auto& s : specs) {
    nodes.push_back({s.id, "T" + std::to_string(s.id), s.exec, s.preds});
    pes = static_cast<int>(s.exec.size());
  }
  return std::make_shared<const TaskGraph>(std::move(name), std::move(nodes), pes);
}

inline Workload make_workload(std::vector<std::shared_ptr<const TaskGraph>> graphs, std::vector<int> capacities) {
  return Workload{std::move(graphs), make_pes(std::move(capacities))};
}

/// Connected random DAG: every task after the first has at least one
/// predecessor among lower ids.
inline std::shared_ptr<const TaskGraph> random_graph(std::mt19937_64& rng, int num_tasks, int num_pes, Tick max_exec = 20,
                                                     Tick max_comm = 15, double extra_edge_p = 0.3) {
  std::uniform_int_distribution<Tick> exec(0, max_exec);
  std::uniform_int_distribution<Tick> comm(0, max_comm);
  std::bernoulli_distribution extra(extra_edge_p);
  std::vector<Spec> specs;
  for (int i = 1; i <= num_tasks; ++i) {
    Spec s{i, {}, {}};
    for (int p = 0; p < num_pes; ++p) {
      s.exec.push_back(exec(rng));
    }
    if (i > 1) {
      std::uniform_int_distribution<int> pick(1, i - 1);
      std::set<int> preds{pick(rng)};
      for (int j = 1; j < i; ++j) {
        if (extra(rng)) preds.insert(j);
      }
      for (int j : preds) s.preds.push_back({j, comm(rng)});
    }
    specs.push_back(std::move(s));
  }
  return make_graph(specs, "random" + std::to_string(num_tasks));
}

/// Assigns a random subset of the ready tasks to random PEs.
inline SchedulerDecision random_decision(const Observation& obs, std::mt19937_64& rng, double p_assign = 0.7) {
  SchedulerDecision d;
  std::bernoulli_distribution take(p_assign);
  std::uniform_int_distribution<PeId> pe(0, obs.pes->num_pes() - 1);
  auto ready = obs.ready;
  std::ranges::shuffle(ready, rng);
  for (const auto& ref : ready) {
    if (take(rng)) d.assignments.push_back({ref, pe(rng)});
  }
  return d;
}

/// Trace-level checks: legal transition order, capacity, and dependency
/// timing. Needs the world for graph structure and capacities.
inline std::vector<std::string> check_trace(const World& world) {
  std::vector<std::string> problems;
  std::map<TaskRef, std::vector<TaskState>> seq;
  Tick last_tick = 0;
  std::vector<std::vector<std::pair<Tick, int>>> pe_events(world.workload().resources->pes.size());
  for (const auto& r : world.trace()) {
    if (r.tick < last_tick) problems.push_back("trace ticks go backwards");
    last_tick = r.tick;
    auto& s = seq[{r.job, r.task}];
    if (!r.from) {
      if (!s.empty() || r.to != TaskState::outstanding) problems.push_back("bad creation record");
    } else if (s.empty() || s.back() != *r.from ||
               static_cast<int>(r.to) != static_cast<int>(*r.from) + 1) {
      problems.push_back("illegal transition for " + to_string(TaskRef{r.job, r.task}));
    }
    s.push_back(r.to);
    if (r.to == TaskState::running) pe_events[*r.pe].push_back({r.tick, +1});
    if (r.to == TaskState::completed) pe_events[*r.pe].push_back({r.tick, -1});
  }
  for (std::size_t p = 0; p < pe_events.size(); ++p) {
    auto ev = pe_events[p];
    std::ranges::stable_sort(ev, [](auto a, auto b) { return std::pair(a.first, a.second) < std::pair(b.first, b.second); });
    int busy = 0;
    for (auto [t, d] : ev) {
      busy += d;
      if (busy > world.workload().resources->pes[p].capacity) problems.push_back("capacity exceeded on pe " + std::to_string(p));
    }
  }
  for (const auto& [id, job] : world.jobs()) {
    for (const auto& t : job.tasks) {
      if (!t.exec_start) continue;
      for (auto [pi, comm] : job.graph->predecessors(t.index)) {
        const auto& u = job.tasks[pi];
        if (*t.exec_start < *u.exec_finish) problems.push_back("successor started before predecessor finished");
        if (*u.assigned_pe != *t.assigned_pe && *t.exec_start < *u.exec_finish + comm)
          problems.push_back("communication delay not honoured");
      }
    }
  }
  return problems;
}

/// Brute-force optimum for one job on capacity-1 PEs: every topological
/// order crossed with every PE mapping, each task placed at the earliest
/// time after its PE's previous task and its inputs.
inline Tick brute_force_makespan(const TaskGraph& g) {
  const std::size_t n = g.num_tasks();
  const int p = g.num_pes();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Tick best = std::numeric_limits<Tick>::max();
  std::size_t mappings = 1;
  for (std::size_t i = 0; i < n; ++i) mappings *= static_cast<std::size_t>(p);
  do {
    std::vector<std::size_t> pos(n);
    for (std::size_t k = 0; k < n; ++k) pos[order[k]] = k;
    bool topo = true;
    for (std::size_t i = 0; i < n && topo; ++i)
      for (auto [j, c] : g.predecessors(i))
        if (pos[j] > pos[i]) topo = false;
    if (!topo) continue;
    for (std::size_t m = 0; m < mappings; ++m) {
      std::vector<int> pe(n);
      std::size_t code = m;
      for (std::size_t i = 0; i < n; ++i) {
        pe[i] = static_cast<int>(code % static_cast<std::size_t>(p));
        code /= static_cast<std::size_t>(p);
      }
      std::vector<Tick> free(static_cast<std::size_t>(p), 0), finish(n, 0);
      Tick span = 0;
      for (auto i : order) {
        Tick start = free[pe[i]];
        for (auto [j, c] : g.predecessors(i)) start = std::max(start, finish[j] + (pe[j] == pe[i] ? 0 : c));
        finish[i] = start + g.tasks()[i].exec_time[pe[i]];
        free[pe[i]] = finish[i];
        span = std::max(span, finish[i]);
      }
      best = std::min(best, span);
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

/// Longest path of per-task minimum execution times, ignoring communication.
inline Tick critical_path_bound(const TaskGraph& g) {
  std::vector<Tick> longest(g.num_tasks(), 0);
  Tick best = 0;
  for (auto i : g.topo_indices()) {
    Tick in = 0;
    for (auto [j, c] : g.predecessors(i)) in = std::max(in, longest[j]);
    longest[i] = in + std::ranges::min(g.tasks()[i].exec_time);
    best = std::max(best, longest[i]);
  }
  return best;
}

/// Runs one job alone (PSS, queue of one) and returns its makespan.
inline Tick single_job_makespan(std::shared_ptr<const TaskGraph> g, std::shared_ptr<const ResourceProfile> pes,
                                const Scheduler& scheduler) {
  GeneratorConfig cfg;
  cfg.pss = true;
  cfg.queue_capacity = 1;
  cfg.scale = 1e6;
  cfg.sim_length = 1'000'000'000;
  Environment env(Workload{{std::move(g)}, std::move(pes)}, cfg);
  auto obs = env.reset();
  while (!env.done() && env.world().completed_jobs().empty()) {
    obs = env.step(scheduler.schedule(obs)).observation;
  }
  return env.world().completed_jobs().at(0).duration();
}

}  // namespace socsim::testing

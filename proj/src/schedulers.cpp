#include "socsim/schedulers.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace socsim {

std::map<TaskId, double> UpwardRanks::by_id(const TaskGraph& graph) const {
  std::map<TaskId, double> out;
  for (std::size_t i = 0; i < graph.num_tasks(); ++i) {
    out[graph.tasks()[i].id] = (*this)[i];
  }
  return out;
}

UpwardRanks rank_upward(const TaskGraph& graph, const ResourceProfile& resources) {
  const int p = resources.num_pes();
  UpwardRanks ranks{p, std::vector<std::int64_t>(graph.num_tasks(), 0)};
  const auto& topo = graph.topo_indices();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const auto i = *it;
    std::int64_t exec_sum = 0;
    for (Tick e : graph.tasks()[i].exec_time) {
      exec_sum += e;
    }
    std::int64_t tail = 0;
    for (auto [j, comm] : graph.successors(i)) {
      tail = std::max(tail, comm * p + ranks.scaled[j]);
    }
    ranks.scaled[i] = exec_sum + tail;
  }
  return ranks;
}

std::pair<Tick, Tick> eft_with_insertion(Tick exec, std::span<const Interval> busy, Tick data_ready) {
  Tick start = data_ready;
  for (const auto& iv : busy) {
    if (start + exec <= iv.begin) {
      break;
    }
    start = std::max(start, iv.end);
  }
  return {start, start + exec};
}

namespace {

using Timeline = std::vector<Interval>;

void insert_interval(Timeline& line, Interval iv) {
  line.insert(std::ranges::upper_bound(line, iv.begin, {}, &Interval::begin), iv);
}

struct Slot {
  PeId pe = 0;
  std::size_t slot = 0;
  Tick start = 0;
  Tick finish = std::numeric_limits<Tick>::max();
};

/// Best (PE, slot) by insertion EFT over per-slot timelines.
Slot best_insertion_slot(const std::vector<std::vector<Timeline>>& lines, const TaskNode& node,
                         const std::function<Tick(PeId)>& ready_on) {
  Slot best;
  for (PeId p = 0; p < static_cast<PeId>(lines.size()); ++p) {
    const Tick ready = ready_on(p);
    for (std::size_t s = 0; s < lines[p].size(); ++s) {
      auto [start, finish] = eft_with_insertion(node.exec_time[p], lines[p][s], ready);
      if (finish < best.finish) {
        best = {p, s, start, finish};
      }
    }
  }
  return best;
}

const UpwardRanks& lookup_ranks(const RankTable& table, RankTable& scratch, const TaskGraph& graph,
                                const ResourceProfile& resources) {
  if (auto it = table.find(&graph); it != table.end()) {
    return it->second;
  }
  auto [it, inserted] = scratch.try_emplace(&graph, rank_upward(graph, resources));
  return it->second;
}

const TaskNode& node_of(const Observation& obs, const TaskRef& ref) {
  const auto& job = obs.job(ref.job);
  return job.graph->tasks()[job.graph->index_of(ref.task)];
}

/// Earliest-free slot per PE, mutable planning copy.
std::vector<std::vector<Tick>> planning_slots(const Observation& obs) {
  auto slots = obs.env_storage.slot_free;
  for (auto& pe : slots) {
    for (auto& t : pe) {
      t = std::max(t, obs.env_storage.clock);
    }
  }
  return slots;
}

}  // namespace

StaticSchedule static_heft(const TaskGraph& graph, const ResourceProfile& resources) {
  const auto ranks = rank_upward(graph, resources);
  std::vector<std::size_t> order(graph.num_tasks());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
    return std::tuple(-ranks.scaled[a], graph.tasks()[a].id) < std::tuple(-ranks.scaled[b], graph.tasks()[b].id);
  });

  std::vector<std::vector<Timeline>> lines;
  for (const auto& pe : resources.pes) {
    lines.emplace_back(static_cast<std::size_t>(pe.capacity));
  }
  std::vector<PlannedTask> placed(graph.num_tasks());
  StaticSchedule out;
  for (auto i : order) {
    const auto& node = graph.tasks()[i];
    auto ready_on = [&](PeId p) {
      Tick ready = 0;
      for (auto [pi, comm] : graph.predecessors(i)) {
        ready = std::max(ready, placed[pi].finish + comm_delay(placed[pi].pe, p, comm));
      }
      return ready;
    };
    const Slot best = best_insertion_slot(lines, node, ready_on);
    insert_interval(lines[best.pe][best.slot], {best.start, best.finish});
    placed[i] = {node.id, best.pe, best.start, best.finish};
    out.placements.push_back(placed[i]);
    out.makespan = std::max(out.makespan, best.finish);
  }
  return out;
}

Tick data_ready_time(const Observation& obs, const TaskRef& ref, PeId pe) {
  const auto& job = obs.job(ref.job);
  const auto index = job.graph->index_of(ref.task);
  Tick ready = job.tasks[index].ready_time.value_or(obs.env_storage.clock);
  for (auto [pi, comm] : job.graph->predecessors(index)) {
    const auto& pred = job.tasks[pi];
    ready = std::max(ready, *pred.exec_finish + comm_delay(*pred.pe, pe, comm));
  }
  return ready;
}

SchedulerDecision schedule_met(const Observation& obs) {
  SchedulerDecision out;
  for (const auto& ref : obs.ready) {
    const auto& exec = node_of(obs, ref).exec_time;
    const auto best = std::ranges::min_element(exec) - exec.begin();
    out.assignments.push_back({ref, static_cast<PeId>(best)});
  }
  return out;
}

SchedulerDecision schedule_sjf(const Observation& obs) {
  std::vector<std::pair<Tick, TaskRef>> order;
  for (const auto& ref : obs.ready) {
    order.emplace_back(std::ranges::min(node_of(obs, ref).exec_time), ref);
  }
  std::ranges::sort(order, [](const auto& a, const auto& b) {
    return std::tuple(a.first, a.second.task, a.second.job) < std::tuple(b.first, b.second.task, b.second.job);
  });

  auto slots = planning_slots(obs);
  SchedulerDecision out;
  for (const auto& [shortest, ref] : order) {
    const auto& exec = node_of(obs, ref).exec_time;
    PeId best_pe = 0;
    Tick best_finish = std::numeric_limits<Tick>::max();
    for (PeId p = 0; p < static_cast<PeId>(slots.size()); ++p) {
      const Tick free = std::ranges::min(slots[p]);
      const Tick finish = std::max(free, data_ready_time(obs, ref, p)) + exec[p];
      if (finish < best_finish) {
        best_finish = finish;
        best_pe = p;
      }
    }
    *std::ranges::min_element(slots[best_pe]) = best_finish;
    out.assignments.push_back({ref, best_pe});
  }
  return out;
}

SchedulerDecision schedule_etf(const Observation& obs) {
  auto slots = planning_slots(obs);
  std::vector<TaskRef> pending = obs.ready;
  SchedulerDecision out;
  while (!pending.empty()) {
    using Key = std::tuple<Tick, Tick, TaskId, JobId, PeId>;
    Key best{std::numeric_limits<Tick>::max(), 0, 0, 0, 0};
    std::size_t best_index = 0;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const auto& ref = pending[k];
      const auto& exec = node_of(obs, ref).exec_time;
      for (PeId p = 0; p < static_cast<PeId>(slots.size()); ++p) {
        const Tick start = std::max(std::ranges::min(slots[p]), data_ready_time(obs, ref, p));
        Key key{start, start + exec[p], ref.task, ref.job, p};
        if (key < best) {
          best = key;
          best_index = k;
        }
      }
    }
    const PeId pe = std::get<4>(best);
    *std::ranges::min_element(slots[pe]) = std::get<1>(best);
    out.assignments.push_back({pending[best_index], pe});
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best_index));
  }
  return out;
}

SchedulerDecision schedule_heft(const Observation& obs, const RankTable& ranks) {
  const Tick now = obs.env_storage.clock;
  RankTable scratch;
  struct Item {
    TaskRef ref;
    std::int64_t scaled_rank;
  };
  std::vector<Item> order;
  for (const auto& ref : obs.ready) {
    const auto& job = obs.job(ref.job);
    const auto& r = lookup_ranks(ranks, scratch, *job.graph, *obs.pes);
    order.push_back({ref, r.scaled[job.graph->index_of(ref.task)]});
  }
  std::ranges::sort(order, [](const Item& a, const Item& b) {
    return std::tuple(-a.scaled_rank, a.ref.task, a.ref.job) < std::tuple(-b.scaled_rank, b.ref.task, b.ref.job);
  });

  // Committed work occupies each slot contiguously from now, so the live
  // timeline of a slot is a single interval.
  std::vector<std::vector<Timeline>> lines(obs.env_storage.slot_free.size());
  for (std::size_t p = 0; p < lines.size(); ++p) {
    for (Tick free : obs.env_storage.slot_free[p]) {
      lines[p].push_back(free > now ? Timeline{{now, free}} : Timeline{});
    }
  }

  std::vector<std::pair<Assignment, Interval>> planned;
  for (const auto& item : order) {
    const auto& node = node_of(obs, item.ref);
    auto ready_on = [&](PeId p) { return std::max(now, data_ready_time(obs, item.ref, p)); };
    const Slot best = best_insertion_slot(lines, node, ready_on);
    insert_interval(lines[best.pe][best.slot], {best.start, best.finish});
    planned.push_back({{item.ref, best.pe}, {best.start, best.finish}});
  }

  // Keep rank order overall, but on each PE emit tasks in planned order
  // (start, then finish so zero-length tasks precede a task starting on the
  // same tick) so the kernel's FIFO backlog realises gap insertions faithfully.
  std::map<PeId, std::vector<std::size_t>> positions;
  for (std::size_t k = 0; k < planned.size(); ++k) {
    positions[planned[k].first.pe].push_back(k);
  }
  SchedulerDecision out;
  out.assignments.resize(planned.size());
  for (auto& [pe, pos] : positions) {
    std::vector<std::size_t> by_start = pos;
    std::ranges::stable_sort(by_start, {}, [&](std::size_t k) {
      return std::pair(planned[k].second.begin, planned[k].second.end);
    });
    for (std::size_t n = 0; n < pos.size(); ++n) {
      out.assignments[pos[n]] = planned[by_start[n]].first;
    }
  }
  return out;
}

namespace {

class FunctionScheduler final : public Scheduler {
public:
  FunctionScheduler(std::string name, SchedulerDecision (*fn)(const Observation&)) : name_(std::move(name)), fn_(fn) {}
  std::string_view name() const override { return name_; }
  SchedulerDecision schedule(const Observation& obs) const override { return fn_(obs); }

private:
  std::string name_;
  SchedulerDecision (*fn_)(const Observation&);
};

class HeftScheduler final : public Scheduler {
public:
  explicit HeftScheduler(const Workload& workload) {
    for (const auto& g : workload.jobs) {
      ranks_.try_emplace(g.get(), rank_upward(*g, *workload.resources));
    }
  }
  std::string_view name() const override { return "heft"; }
  SchedulerDecision schedule(const Observation& obs) const override { return schedule_heft(obs, ranks_); }

private:
  RankTable ranks_;
};

}  // namespace

SchedulerRegistry SchedulerRegistry::with_builtins() {
  SchedulerRegistry r;
  r.add("sjf", [](const Workload&) { return std::make_unique<FunctionScheduler>("sjf", &schedule_sjf); });
  r.add("met", [](const Workload&) { return std::make_unique<FunctionScheduler>("met", &schedule_met); });
  r.add("etf", [](const Workload&) { return std::make_unique<FunctionScheduler>("etf", &schedule_etf); });
  r.add("heft", [](const Workload& w) { return std::make_unique<HeftScheduler>(w); });
  return r;
}

void SchedulerRegistry::add(std::string name, Factory factory) { factories_[std::move(name)] = std::move(factory); }

bool SchedulerRegistry::contains(std::string_view name) const { return factories_.find(name) != factories_.end(); }

std::vector<std::string> SchedulerRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, f] : factories_) {
    out.push_back(name);
  }
  return out;
}

std::unique_ptr<Scheduler> SchedulerRegistry::create(std::string_view name, const Workload& workload) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) {
    std::string valid;
    for (const auto& n : names()) {
      valid += (valid.empty() ? "" : ", ") + n;
    }
    throw ConfigError("unknown scheduler '" + std::string(name) + "' (valid: " + valid + ")");
  }
  return it->second(workload);
}

}  // namespace socsim

#include "socsim/jobgen.hpp"

#include <algorithm>
#include <cmath>

#include "socsim/kernel.hpp"

namespace socsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kArrivalStream = 0x61727269766c73ULL;
constexpr std::uint64_t kChoiceStream = 0x63686f69636573ULL;

}  // namespace

void GeneratorConfig::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("scale must be a positive number");
  }
  if (queue_capacity < 1) {
    throw ConfigError("queue_capacity must be >= 1");
  }
  if (sim_length < 0) {
    throw ConfigError("sim_length must be non-negative");
  }
  if (warmup_ticks < 0 || (warmup_ticks > 0 && warmup_ticks >= sim_length)) {
    throw ConfigError("warmup_ticks must be non-negative and below sim_length");
  }
}

double open_unit_interval(std::uint64_t bits) { return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52; }

Tick interarrival_from_uniform(double u, double scale) {
  return std::max<Tick>(1, std::llround(-scale * std::log(u)));
}

Tick sample_interarrival(std::mt19937_64& rng, double scale) {
  return interarrival_from_uniform(open_unit_interval(rng()), scale);
}

ArrivalStreams::ArrivalStreams(std::uint64_t seed)
    : arrivals_(splitmix64(seed ^ kArrivalStream)), choices_(splitmix64(seed ^ kChoiceStream)) {}

std::size_t ArrivalStreams::pick_profile(std::size_t num_profiles) {
  const auto pick = static_cast<std::size_t>(open_unit_interval(choices_()) * static_cast<double>(num_profiles));
  return std::min(pick, num_profiles - 1);
}

JobId World::inject_job() {
  if (queue_.full()) {
    throw SimulationError("job queue is full");
  }
  const std::size_t profile = streams_.pick_profile(workload_.jobs.size());
  JobInstance job;
  job.id = next_job_id_++;
  job.profile = profile;
  job.graph = workload_.jobs[profile];
  job.inject_time = now_;
  const auto& nodes = job.graph->tasks();
  job.tasks.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    TaskInstance t;
    t.job = job.id;
    t.task_id = nodes[i].id;
    t.index = i;
    job.tasks.push_back(t);
  }
  auto [it, inserted] = jobs_.emplace(job.id, std::move(job));
  for (const auto& t : it->second.tasks) {
    lists_[0].push_back({t.job, t.task_id});
    record(t, std::nullopt, std::nullopt);
  }
  queue_.live_jobs.push_back(it->first);
  release_ready_tasks();
  return it->first;
}

void World::prefill_pss() {
  if (!config_.pss || now_ != 0 || !jobs_.empty()) {
    throw SimulationError("pseudo-steady-state prefill needs a fresh PSS world");
  }
  for (int i = 0; i < queue_.capacity; ++i) {
    inject_job();
  }
  events_.push(now_ + streams_.next_interarrival(config_.scale), EventKind::job_arrival);
}

void World::on_arrival() {
  arrival_times_.push_back(now_);
  if (!queue_.full()) {
    inject_job();
    events_.push(now_ + streams_.next_interarrival(config_.scale), EventKind::job_arrival);
  } else if (config_.drop_when_full) {
    ++dropped_;
    events_.push(now_ + streams_.next_interarrival(config_.scale), EventKind::job_arrival);
  } else {
    // Held until a slot frees; the next arrival is sampled from that instant.
    deferred_arrival_ = true;
  }
}

void World::on_queue_slot_freed() {
  if (deferred_arrival_) {
    deferred_arrival_ = false;
    inject_job();
    events_.push(now_ + streams_.next_interarrival(config_.scale), EventKind::job_arrival);
  }
}

}  // namespace socsim

#include "socsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <tuple>

namespace socsim {

void ExperimentSpec::validate(const SchedulerRegistry& registry) const {
  if (schedulers.empty() || scales.empty() || seeds.empty()) {
    throw ConfigError("scheduler, scale and seed lists must be non-empty");
  }
  for (const auto& s : schedulers) {
    if (!registry.contains(s)) {
      registry.create(s, {});  // throws with the list of valid names
    }
  }
  for (double s : scales) {
    generator(s, 0).validate();
  }
  if (!std::filesystem::is_directory(profiles)) {
    throw ConfigError("profile directory not found: " + profiles.string());
  }
  if (jobs == 0) {
    throw ConfigError("jobs must be >= 1");
  }
}

GeneratorConfig ExperimentSpec::generator(double scale, std::uint64_t seed) const {
  GeneratorConfig g;
  g.scale = scale;
  g.queue_capacity = queue_capacity;
  g.sim_length = sim_length;
  g.seed = seed;
  g.pss = pss;
  g.warmup_ticks = warmup_ticks;
  g.drop_when_full = drop_when_full;
  return g;
}

RunResult run_single(const Workload& workload, const Scheduler& scheduler, const GeneratorConfig& config) {
  RunResult out;
  out.scheduler = std::string(scheduler.name());
  out.scale = config.scale;
  out.seed = config.seed;
  Environment env(workload, config);
  Observation obs = env.reset();
  while (!env.done()) {
    obs = env.step(scheduler.schedule(obs)).observation;
  }
  out.trace = env.world().trace();
  out.stats = compute_stats(out.trace, config.warmup_ticks);
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string trace_file_name(const std::string& scheduler, double scale, std::uint64_t seed, TraceFormat format) {
  std::ostringstream name;
  name << scheduler << "_scale" << format_number(scale) << "_seed" << seed
       << (format == TraceFormat::csv ? ".csv" : ".jsonl");
  return name.str();
}

std::vector<RunResult> run_experiment(const ExperimentSpec& spec, const SchedulerRegistry& registry) {
  spec.validate(registry);
  const Workload workload = load_workload(spec.profiles);

  struct Key {
    std::string scheduler;
    double scale;
    std::uint64_t seed;
  };
  std::vector<Key> keys;
  for (const auto& s : spec.schedulers) {
    for (double scale : spec.scales) {
      for (auto seed : spec.seeds) {
        keys.push_back({s, scale, seed});
      }
    }
  }
  std::ranges::sort(keys, [](const Key& a, const Key& b) {
    return std::tie(a.scheduler, a.scale, a.seed) < std::tie(b.scheduler, b.scale, b.seed);
  });
  if (spec.trace_dir) {
    std::filesystem::create_directories(*spec.trace_dir);
  }

  std::vector<RunResult> rows(keys.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      const auto& k = keys[i];
      auto& row = rows[i];
      try {
        const auto scheduler = registry.create(k.scheduler, workload);
        row = run_single(workload, *scheduler, spec.generator(k.scale, k.seed));
        if (spec.trace_dir) {
          std::ofstream f(*spec.trace_dir / trace_file_name(k.scheduler, k.scale, k.seed, spec.trace_format),
                          std::ios::binary);
          write_trace(f, row.trace, spec.trace_format);
          if (!f) {
            throw std::runtime_error("failed to write trace file");
          }
        }
        row.trace.clear();
        row.trace.shrink_to_fit();
      } catch (const std::exception& e) {
        row = RunResult{};
        row.error = e.what();
      }
      row.scheduler = k.scheduler;
      row.scale = k.scale;
      row.seed = k.seed;
    }
  };
  const unsigned workers = std::min<std::size_t>(spec.jobs, keys.size());
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) {
    pool.emplace_back(worker);
  }
  worker();
  pool.clear();
  return rows;
}

std::string format_results(const std::vector<RunResult>& rows) {
  std::ostringstream out;
  out << "scheduler,scale,seed,art,mean_waiting,mean_running,avg_latency,throughput_ratio,injected,completed,"
         "remaining,error\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("nodata"); };
  for (const auto& r : rows) {
    const auto& s = r.stats;
    out << r.scheduler << ',' << format_number(r.scale) << ',' << r.seed << ',';
    if (r.error) {
      out << "nodata,nodata,nodata,nodata,nodata,nodata,nodata,nodata,\"";
      for (char c : *r.error) {
        out << (c == '"' ? '\'' : c == '\n' ? ' ' : c);
      }
      out << "\"\n";
      continue;
    }
    const auto resp = s.response;
    out << opt(resp ? std::optional(resp->art) : std::nullopt) << ','
        << opt(resp ? std::optional(resp->mean_waiting) : std::nullopt) << ','
        << opt(resp ? std::optional(resp->mean_running) : std::nullopt) << ',' << opt(s.avg_latency) << ','
        << opt(s.throughput_ratio) << ',' << s.counts.injected << ',' << s.counts.completed << ','
        << s.counts.remaining << ",\n";
  }
  return out.str();
}

}  // namespace socsim

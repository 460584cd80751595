#include "socsim/metrics.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace socsim {

namespace {

struct JobTrace {
  Tick inject = 0;
  std::size_t num_tasks = 0;
  std::size_t num_completed = 0;
  std::optional<Tick> finish;
};

struct PartialTask {
  Tick ready = 0;
  PeId pe = 0;
  Tick start = 0;
};

struct Replay {
  std::map<JobId, JobTrace> jobs;
  std::vector<TaskRecord> completed;  // in completion order
};

Replay replay(std::span<const TraceRecord> trace) {
  Replay r;
  std::map<TaskRef, PartialTask> open;
  for (const auto& rec : trace) {
    const TaskRef ref{rec.job, rec.task};
    if (!rec.from) {
      auto [it, fresh] = r.jobs.try_emplace(rec.job, JobTrace{rec.tick, 0, 0, std::nullopt});
      ++it->second.num_tasks;
      continue;
    }
    switch (rec.to) {
      case TaskState::ready:
        open[ref].ready = rec.tick;
        break;
      case TaskState::running:
        open[ref].pe = rec.pe.value_or(0);
        open[ref].start = rec.exec_start.value_or(rec.tick);
        break;
      case TaskState::completed: {
        const auto& p = open[ref];
        r.completed.push_back(TaskRecord{rec.job, rec.task, p.pe, p.ready, p.start, rec.tick});
        open.erase(ref);
        auto& job = r.jobs.at(rec.job);
        if (++job.num_completed == job.num_tasks) {
          job.finish = rec.tick;
        }
        break;
      }
      default:
        break;
    }
  }
  return r;
}

std::vector<TaskRecord> counted(const Replay& r, Tick warmup) {
  std::vector<TaskRecord> out;
  for (const auto& t : r.completed) {
    if (r.jobs.at(t.job).inject >= warmup) {
      out.push_back(t);
    }
  }
  return out;
}

std::optional<ResponseTime> response_of(const std::vector<TaskRecord>& tasks) {
  if (tasks.empty()) {
    return std::nullopt;
  }
  Tick waiting = 0;
  Tick running = 0;
  for (const auto& t : tasks) {
    waiting += t.waiting();
    running += t.running();
  }
  const auto n = static_cast<double>(tasks.size());
  return ResponseTime{static_cast<double>(waiting + running) / n, static_cast<double>(waiting) / n,
                      static_cast<double>(running) / n, tasks.size()};
}

std::optional<double> latency_of(const Replay& r, Tick warmup) {
  Tick total = 0;
  std::size_t n = 0;
  for (const auto& [id, job] : r.jobs) {
    if (job.inject >= warmup && job.finish) {
      total += *job.finish - job.inject;
      ++n;
    }
  }
  if (n == 0) {
    return std::nullopt;
  }
  return static_cast<double>(total) / static_cast<double>(n);
}

JobCounts counts_of(const Replay& r, Tick warmup) {
  JobCounts c;
  for (const auto& [id, job] : r.jobs) {
    if (job.inject >= warmup) {
      ++c.injected;
      c.completed += job.finish ? 1 : 0;
    }
  }
  c.remaining = c.injected - c.completed;
  return c;
}

std::optional<double> throughput_of(const std::vector<TaskRecord>& tasks, const JobCounts& counts) {
  Tick busy = 0;
  for (const auto& t : tasks) {
    busy += t.running();
  }
  if (busy == 0) {
    return std::nullopt;
  }
  return static_cast<double>(counts.completed) / static_cast<double>(busy);
}

template <typename T>
std::optional<T> parse_optional_int(std::string_view field) {
  if (field.empty()) {
    return std::nullopt;
  }
  T v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::runtime_error("malformed trace field '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::vector<TaskRecord> counted_tasks(std::span<const TraceRecord> trace, Tick warmup) {
  return counted(replay(trace), warmup);
}

std::optional<ResponseTime> average_response_time(std::span<const TraceRecord> trace, Tick warmup) {
  return response_of(counted_tasks(trace, warmup));
}

std::optional<double> average_latency(std::span<const TraceRecord> trace, Tick warmup) {
  return latency_of(replay(trace), warmup);
}

JobCounts job_counts(std::span<const TraceRecord> trace, Tick warmup) { return counts_of(replay(trace), warmup); }

std::optional<double> throughput_ratio(std::span<const TraceRecord> trace, Tick warmup) {
  const auto r = replay(trace);
  return throughput_of(counted(r, warmup), counts_of(r, warmup));
}

RunStats compute_stats(std::span<const TraceRecord> trace, Tick warmup) {
  const auto r = replay(trace);
  RunStats s;
  s.tasks = counted(r, warmup);
  s.response = response_of(s.tasks);
  s.avg_latency = latency_of(r, warmup);
  s.counts = counts_of(r, warmup);
  s.throughput_ratio = throughput_of(s.tasks, s.counts);
  return s;
}

TraceFormat trace_format_from_string(const std::string& s) {
  if (s == "csv") return TraceFormat::csv;
  if (s == "jsonl") return TraceFormat::jsonl;
  throw std::invalid_argument("unknown trace format '" + s + "' (valid: csv, jsonl)");
}

void write_trace(std::ostream& out, std::span<const TraceRecord> trace, TraceFormat format) {
  if (format == TraceFormat::csv) {
    out << "tick,job,task,from,to,pe,start\n";
    for (const auto& r : trace) {
      out << r.tick << ',' << r.job << ',' << r.task << ',' << (r.from ? to_string(*r.from) : "-") << ','
          << to_string(r.to) << ',';
      if (r.pe) out << *r.pe;
      out << ',';
      if (r.exec_start) out << *r.exec_start;
      out << '\n';
    }
    return;
  }
  for (const auto& r : trace) {
    nlohmann::json j = {{"tick", r.tick},
                        {"job", r.job},
                        {"task", r.task},
                        {"from", r.from ? std::string(to_string(*r.from)) : "-"},
                        {"to", to_string(r.to)},
                        {"pe", r.pe ? nlohmann::json(*r.pe) : nlohmann::json(nullptr)},
                        {"start", r.exec_start ? nlohmann::json(*r.exec_start) : nlohmann::json(nullptr)}};
    out << j.dump() << '\n';
  }
}

std::vector<TraceRecord> read_trace(std::istream& in, TraceFormat format) {
  std::vector<TraceRecord> out;
  std::string line;
  auto state_or_none = [](const std::string& s) -> std::optional<TaskState> {
    if (s == "-") return std::nullopt;
    return task_state_from_string(s);
  };
  if (format == TraceFormat::csv) {
    if (!std::getline(in, line) || line != "tick,job,task,from,to,pe,start") {
      throw std::runtime_error("trace is missing its CSV header");
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) f.push_back(cell);
      if (!line.empty() && line.back() == ',') f.emplace_back();
      if (f.size() != 7) {
        throw std::runtime_error("malformed trace row '" + line + "'");
      }
      out.push_back(TraceRecord{*parse_optional_int<Tick>(f[0]), *parse_optional_int<JobId>(f[1]),
                                *parse_optional_int<TaskId>(f[2]), state_or_none(f[3]), task_state_from_string(f[4]),
                                parse_optional_int<PeId>(f[5]), parse_optional_int<Tick>(f[6])});
    }
    return out;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    TraceRecord r;
    r.tick = j.at("tick").get<Tick>();
    r.job = j.at("job").get<JobId>();
    r.task = j.at("task").get<TaskId>();
    r.from = state_or_none(j.at("from").get<std::string>());
    r.to = task_state_from_string(j.at("to").get<std::string>());
    if (!j.at("pe").is_null()) r.pe = j.at("pe").get<PeId>();
    if (!j.at("start").is_null()) r.exec_start = j.at("start").get<Tick>();
    out.push_back(r);
  }
  return out;
}

}  // namespace socsim

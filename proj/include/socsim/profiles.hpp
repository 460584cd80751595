#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace socsim {

/// Simulation time in clock ticks.
using Tick = std::int64_t;
using TaskId = int;
using PeId = int;

/// Raised for malformed profile documents and for documents that parse but
/// violate a structural invariant. The message names the violated rule.
class ProfileError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Predecessor {
  TaskId task = 0;
  Tick comm = 0;

  bool operator==(const Predecessor&) const = default;
};

struct TaskNode {
  TaskId id = 0;
  std::string name;
  std::vector<Tick> exec_time;  // indexed by PE id
  std::vector<Predecessor> predecessors;

  bool operator==(const TaskNode&) const = default;
};

/// A job profile: a DAG of tasks with per-PE execution costs and per-edge
/// communication costs. Immutable once built; shared between simulations.
class TaskGraph {
public:
  TaskGraph() = default;

  /// Validates and builds. Throws ProfileError on any invariant violation.
  TaskGraph(std::string name, std::vector<TaskNode> tasks, int num_pes);

  const std::string& name() const { return name_; }
  const std::vector<TaskNode>& tasks() const { return tasks_; }
  std::size_t num_tasks() const { return tasks_.size(); }
  int num_pes() const { return num_pes_; }

  /// Position of a task id in tasks(); throws std::out_of_range if unknown.
  std::size_t index_of(TaskId id) const;
  const TaskNode& task(TaskId id) const { return tasks_[index_of(id)]; }

  /// Successor edges (index, comm) for the task at index i.
  const std::vector<std::pair<std::size_t, Tick>>& successors(std::size_t i) const { return succ_[i]; }
  /// Predecessor edges (index, comm) for the task at index i.
  const std::vector<std::pair<std::size_t, Tick>>& predecessors(std::size_t i) const { return pred_[i]; }

  /// Task indices in topological order, ties broken by ascending task id.
  const std::vector<std::size_t>& topo_indices() const { return topo_; }

  bool operator==(const TaskGraph& other) const {
    return name_ == other.name_ && num_pes_ == other.num_pes_ && tasks_ == other.tasks_;
  }

private:
  std::string name_;
  std::vector<TaskNode> tasks_;
  int num_pes_ = 0;
  std::vector<std::pair<TaskId, std::size_t>> id_index_;  // sorted by id
  std::vector<std::vector<std::pair<std::size_t, Tick>>> succ_;
  std::vector<std::vector<std::pair<std::size_t, Tick>>> pred_;
  std::vector<std::size_t> topo_;
};

struct OperatingPoint {
  double freq_mhz = 0.0;
  double voltage_v = 0.0;

  bool operator==(const OperatingPoint&) const = default;
};

struct ProcessingElement {
  PeId id = 0;
  std::string name;
  int capacity = 1;
  std::vector<OperatingPoint> opps;

  bool operator==(const ProcessingElement&) const = default;
};

struct ResourceProfile {
  std::vector<ProcessingElement> pes;  // pes[i].id == i after parsing

  int num_pes() const { return static_cast<int>(pes.size()); }
  bool operator==(const ResourceProfile&) const = default;
};

/// Job profiles plus the resource profile they were validated against.
struct Workload {
  std::vector<std::shared_ptr<const TaskGraph>> jobs;
  std::shared_ptr<const ResourceProfile> resources;
};

ResourceProfile parse_resource_profile(std::string_view source);
/// The job document must carry an exec_time entry for every PE in resources.
TaskGraph parse_job_profile(std::string_view source, const ResourceProfile& resources);

std::string serialize_resource_profile(const ResourceProfile& resources);
std::string serialize_job_profile(const TaskGraph& graph);

/// Task ids in dependency order; ties go to the smaller id.
std::vector<TaskId> topological_order(const TaskGraph& graph);

/// Loads <dir>/resources.json and every <dir>/jobs/*.json (sorted by file name).
Workload load_workload(const std::filesystem::path& dir);

}  // namespace socsim

#include "socsim/profiles.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace socsim {

using nlohmann::json;

namespace {

json parse_document(std::string_view source) {
  try {
    return json::parse(source);
  } catch (const json::parse_error& e) {
    throw ProfileError(std::string("syntax error: ") + e.what());
  }
}

template <typename T>
T require(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ProfileError(std::string("validation error: ") + where + " missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ProfileError(std::string("validation error: ") + where + " field '" + key + "' has the wrong type");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ProfileError("cannot open profile file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool weakly_connected(const TaskGraph& graph) {
  const std::size_t n = graph.num_tasks();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    for (const auto* adj : {&graph.successors(i), &graph.predecessors(i)}) {
      for (auto [j, c] : *adj) {
        if (!seen[j]) {
          seen[j] = true;
          ++count;
          stack.push_back(j);
        }
      }
    }
  }
  return count == n;
}

}  // namespace

TaskGraph::TaskGraph(std::string name, std::vector<TaskNode> tasks, int num_pes)
    : name_(std::move(name)), tasks_(std::move(tasks)), num_pes_(num_pes) {
  const std::size_t n = tasks_.size();
  if (n == 0) {
    throw ProfileError("validation error: empty job profile '" + name_ + "'");
  }
  id_index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    id_index_.emplace_back(tasks_[i].id, i);
  }
  std::ranges::sort(id_index_);
  for (std::size_t i = 1; i < n; ++i) {
    if (id_index_[i].first == id_index_[i - 1].first) {
      throw ProfileError("validation error: duplicate id " + std::to_string(id_index_[i].first));
    }
  }

  succ_.assign(n, {});
  pred_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = tasks_[i];
    if (static_cast<int>(t.exec_time.size()) != num_pes_) {
      throw ProfileError("validation error: missing exec_time for task " + std::to_string(t.id));
    }
    for (Tick e : t.exec_time) {
      if (e < 0) {
        throw ProfileError("validation error: negative exec_time for task " + std::to_string(t.id));
      }
    }
    for (const auto& p : t.predecessors) {
      auto it = std::ranges::lower_bound(id_index_, std::pair{p.task, std::size_t{0}});
      if (it == id_index_.end() || it->first != p.task) {
        throw ProfileError("validation error: dangling edge " + std::to_string(p.task) + " -> " +
                           std::to_string(t.id));
      }
      if (p.comm < 0) {
        throw ProfileError("validation error: negative comm cost on edge " + std::to_string(p.task) + " -> " +
                           std::to_string(t.id));
      }
      if (std::ranges::any_of(pred_[i], [&](const auto& e) { return e.first == it->second; })) {
        throw ProfileError("validation error: duplicate edge " + std::to_string(p.task) + " -> " +
                           std::to_string(t.id));
      }
      pred_[i].emplace_back(it->second, p.comm);
      succ_[it->second].emplace_back(i, p.comm);
    }
  }

  // Kahn's algorithm with a min-heap on task id for the deterministic tie-break.
  std::vector<std::size_t> indegree(n);
  using Item = std::pair<TaskId, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    indegree[i] = pred_[i].size();
    if (indegree[i] == 0) {
      frontier.emplace(tasks_[i].id, i);
    }
  }
  topo_.reserve(n);
  while (!frontier.empty()) {
    auto [id, i] = frontier.top();
    frontier.pop();
    topo_.push_back(i);
    for (auto [j, c] : succ_[i]) {
      if (--indegree[j] == 0) {
        frontier.emplace(tasks_[j].id, j);
      }
    }
  }
  if (topo_.size() != n) {
    throw ProfileError("validation error: cycle in job profile '" + name_ + "'");
  }
}

std::size_t TaskGraph::index_of(TaskId id) const {
  auto it = std::ranges::lower_bound(id_index_, std::pair{id, std::size_t{0}});
  if (it == id_index_.end() || it->first != id) {
    throw std::out_of_range("unknown task id " + std::to_string(id));
  }
  return it->second;
}

std::vector<TaskId> topological_order(const TaskGraph& graph) {
  std::vector<TaskId> out;
  out.reserve(graph.num_tasks());
  for (auto i : graph.topo_indices()) {
    out.push_back(graph.tasks()[i].id);
  }
  return out;
}

ResourceProfile parse_resource_profile(std::string_view source) {
  const json doc = parse_document(source);
  if (!doc.is_object() || !doc.contains("pes") || !doc["pes"].is_array()) {
    throw ProfileError("validation error: resource profile needs a 'pes' array");
  }
  ResourceProfile out;
  for (const auto& item : doc["pes"]) {
    ProcessingElement pe;
    pe.id = require<int>(item, "id", "pe");
    pe.name = item.value("name", "PE" + std::to_string(pe.id));
    pe.capacity = item.contains("capacity") ? require<int>(item, "capacity", "pe") : 1;
    if (pe.capacity < 1) {
      throw ProfileError("validation error: capacity must be >= 1 for pe " + std::to_string(pe.id));
    }
    if (item.contains("opps")) {
      for (const auto& o : item.at("opps")) {
        OperatingPoint opp{require<double>(o, "freq_mhz", "opp"), require<double>(o, "voltage_v", "opp")};
        if (!(opp.freq_mhz > 0.0) || !(opp.voltage_v > 0.0)) {
          throw ProfileError("validation error: opp frequency and voltage must be positive");
        }
        pe.opps.push_back(opp);
      }
      std::ranges::stable_sort(pe.opps, {}, &OperatingPoint::freq_mhz);
    }
    out.pes.push_back(std::move(pe));
  }
  if (out.pes.empty()) {
    throw ProfileError("validation error: empty resource profile");
  }
  std::ranges::sort(out.pes, {}, &ProcessingElement::id);
  for (std::size_t i = 0; i < out.pes.size(); ++i) {
    if (i > 0 && out.pes[i].id == out.pes[i - 1].id) {
      throw ProfileError("validation error: duplicate id " + std::to_string(out.pes[i].id));
    }
    if (out.pes[i].id != static_cast<int>(i)) {
      throw ProfileError("validation error: pe ids must be dense 0..P-1");
    }
  }
  return out;
}

TaskGraph parse_job_profile(std::string_view source, const ResourceProfile& resources) {
  const json doc = parse_document(source);
  if (!doc.is_object() || !doc.contains("tasks") || !doc["tasks"].is_array()) {
    throw ProfileError("validation error: job profile needs a 'tasks' array");
  }
  std::string name = doc.value("name", "job");
  const int num_pes = resources.num_pes();
  std::vector<TaskNode> tasks;
  for (const auto& item : doc["tasks"]) {
    TaskNode t;
    t.id = require<int>(item, "id", "task");
    t.name = item.value("name", "T" + std::to_string(t.id));
    const auto exec = require<std::map<std::string, Tick>>(item, "exec_time", "task");
    t.exec_time.resize(num_pes);
    for (int p = 0; p < num_pes; ++p) {
      auto it = exec.find(std::to_string(p));
      if (it == exec.end()) {
        throw ProfileError("validation error: missing exec_time for task " + std::to_string(t.id) + " on pe " +
                           std::to_string(p));
      }
      t.exec_time[p] = it->second;
    }
    if (exec.size() != static_cast<std::size_t>(num_pes)) {
      throw ProfileError("validation error: exec_time of task " + std::to_string(t.id) + " names an unknown pe");
    }
    if (item.contains("predecessors")) {
      for (const auto& e : item.at("predecessors")) {
        t.predecessors.push_back({require<int>(e, "task", "edge"), require<Tick>(e, "comm", "edge")});
      }
    }
    tasks.push_back(std::move(t));
  }
  TaskGraph graph(std::move(name), std::move(tasks), num_pes);
  if (!weakly_connected(graph)) {
    throw ProfileError("validation error: job profile '" + graph.name() + "' is disconnected");
  }
  return graph;
}

std::string serialize_resource_profile(const ResourceProfile& resources) {
  json pes = json::array();
  for (const auto& pe : resources.pes) {
    json opps = json::array();
    for (const auto& o : pe.opps) {
      opps.push_back({{"freq_mhz", o.freq_mhz}, {"voltage_v", o.voltage_v}});
    }
    pes.push_back({{"id", pe.id}, {"name", pe.name}, {"capacity", pe.capacity}, {"opps", opps}});
  }
  return json{{"pes", pes}}.dump(2) + "\n";
}

std::string serialize_job_profile(const TaskGraph& graph) {
  json tasks = json::array();
  for (const auto& t : graph.tasks()) {
    json exec = json::object();
    for (std::size_t p = 0; p < t.exec_time.size(); ++p) {
      exec[std::to_string(p)] = t.exec_time[p];
    }
    json preds = json::array();
    for (const auto& e : t.predecessors) {
      preds.push_back({{"task", e.task}, {"comm", e.comm}});
    }
    tasks.push_back({{"id", t.id}, {"name", t.name}, {"exec_time", exec}, {"predecessors", preds}});
  }
  return json{{"name", graph.name()}, {"tasks", tasks}}.dump(2) + "\n";
}

Workload load_workload(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw ProfileError("profile directory not found: " + dir.string());
  }
  Workload w;
  w.resources = std::make_shared<const ResourceProfile>(parse_resource_profile(read_file(dir / "resources.json")));
  std::vector<fs::path> files;
  if (fs::is_directory(dir / "jobs")) {
    for (const auto& entry : fs::directory_iterator(dir / "jobs")) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
  }
  std::ranges::sort(files);
  if (files.empty()) {
    throw ProfileError("no job profiles found under " + (dir / "jobs").string());
  }
  for (const auto& f : files) {
    try {
      w.jobs.push_back(std::make_shared<const TaskGraph>(parse_job_profile(read_file(f), *w.resources)));
    } catch (const ProfileError& e) {
      throw ProfileError(f.filename().string() + ": " + e.what());
    }
  }
  return w;
}

}  // namespace socsim

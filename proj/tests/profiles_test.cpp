#include <doctest.h>

#include "helpers.hpp"

using namespace socsim;
using namespace socsim::testing;

namespace {

const char* kTwoPes = R"({"pes": [{"id": 0, "name": "a", "capacity": 1, "opps": []},
                                   {"id": 1, "name": "b", "capacity": 2, "opps": []}]})";

ResourceProfile two_pes() { return parse_resource_profile(kTwoPes); }

}  // namespace

TEST_CASE("canonical fixture parses to 10 tasks, 15 edges, 3 unit-capacity PEs") {
  const auto w = canonical();
  REQUIRE(w.jobs.size() == 1);
  const auto& g = *w.jobs[0];
  CHECK(g.num_tasks() == 10);
  std::size_t edges = 0;
  for (const auto& t : g.tasks()) edges += t.predecessors.size();
  CHECK(edges == 15);
  REQUIRE(w.resources->pes.size() == 3);
  for (const auto& pe : w.resources->pes) {
    CHECK(pe.capacity == 1);
    CHECK(std::ranges::is_sorted(pe.opps, {}, &OperatingPoint::freq_mhz));
  }
  CHECK(g.task(9).exec_time == std::vector<Tick>{18, 12, 20});
  CHECK(g.task(1).exec_time == std::vector<Tick>{14, 16, 9});
}

TEST_CASE("single task graph is both root and sink") {
  const auto g = parse_job_profile(R"({"name": "one", "tasks": [{"id": 7, "name": "x",
      "exec_time": {"0": 3, "1": 4}, "predecessors": []}]})",
                                   two_pes());
  CHECK(g.num_tasks() == 1);
  CHECK(g.predecessors(0).empty());
  CHECK(g.successors(0).empty());
  CHECK(topological_order(g) == std::vector<TaskId>{7});
}

TEST_CASE("job profile validation errors name the violated rule") {
  const auto pes = two_pes();
  auto error_of = [&](const char* doc) {
    try {
      parse_job_profile(doc, pes);
    } catch (const ProfileError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(error_of(R"({"tasks": [
      {"id": 1, "exec_time": {"0": 1, "1": 1}, "predecessors": [{"task": 2, "comm": 0}]},
      {"id": 2, "exec_time": {"0": 1, "1": 1}, "predecessors": [{"task": 1, "comm": 0}]}]})")
            .find("cycle") != std::string::npos);
  CHECK(error_of(R"({"tasks": [{"id": 1, "exec_time": {"0": 1, "1": 1}, "predecessors": [{"task": 9, "comm": 0}]}]})")
            .find("dangling") != std::string::npos);
  CHECK(error_of(R"({"tasks": [{"id": 1, "exec_time": {"0": 1}, "predecessors": []}]})").find("missing exec_time") !=
        std::string::npos);
  CHECK(error_of(R"({"tasks": [{"id": 1, "exec_time": {"0": 1, "1": 1}},
                                {"id": 2, "exec_time": {"0": 1, "1": 1}}]})")
            .find("disconnected") != std::string::npos);
  CHECK(error_of(R"({"tasks": [)").find("syntax error") != std::string::npos);
  CHECK(error_of(R"({"tasks": [{"id": 1, "exec_time": {"0": -1, "1": 1}}]})").find("negative") != std::string::npos);
}

TEST_CASE("resource profile validation") {
  auto error_of = [](const char* doc) {
    try {
      parse_resource_profile(doc);
    } catch (const ProfileError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(error_of(R"({"pes": []})").find("empty resource profile") != std::string::npos);
  CHECK(error_of(R"({"pes": [{"id": 0}, {"id": 0}]})").find("duplicate id") != std::string::npos);
  CHECK(error_of(R"({"pes": [{"id": 0, "capacity": 0}]})").find("capacity") != std::string::npos);
  CHECK(error_of(R"({"pes": [{"id": 1}]})").find("dense") != std::string::npos);
  CHECK(error_of(R"({"pes": [{"id": 0, "opps": [{"freq_mhz": 0, "voltage_v": 1}]}]})").find("opp") !=
        std::string::npos);
  const auto r = parse_resource_profile(R"({"pes": [{"id": 1, "capacity": 2}, {"id": 0}]})");
  CHECK(r.pes[0].id == 0);
  CHECK(r.pes[0].capacity == 1);
  CHECK(r.pes[1].capacity == 2);
}

TEST_CASE("topological order examples") {
  const auto w = canonical();
  const auto order = topological_order(*w.jobs[0]);
  CHECK(order.front() == 1);
  CHECK(order.back() == 10);

  const auto chain = make_graph({{1, {1}}, {2, {1}, {{1, 0}}}, {3, {1}, {{2, 0}}}});
  CHECK(topological_order(*chain) == std::vector<TaskId>{1, 2, 3});

  const auto independent = make_graph({{2, {1}}, {1, {1}}});
  CHECK(topological_order(*independent) == std::vector<TaskId>{1, 2});
}

TEST_CASE("topological order is a permutation respecting every edge (random graphs)") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_graph(rng, 1 + trial % 12, 3);
    const auto order = topological_order(*g);
    auto sorted = order;
    std::ranges::sort(sorted);
    std::vector<TaskId> ids;
    for (const auto& t : g->tasks()) ids.push_back(t.id);
    std::ranges::sort(ids);
    REQUIRE(sorted == ids);
    std::map<TaskId, std::size_t> pos;
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
    for (const auto& t : g->tasks())
      for (const auto& p : t.predecessors) CHECK(pos[p.task] < pos[t.id]);
  }
}

TEST_CASE("serialize then parse gives an equal structure; parsing is pure") {
  const auto w = canonical();
  const auto text = serialize_job_profile(*w.jobs[0]);
  CHECK(parse_job_profile(text, *w.resources) == *w.jobs[0]);
  CHECK(parse_job_profile(text, *w.resources) == parse_job_profile(text, *w.resources));
  CHECK(parse_resource_profile(serialize_resource_profile(*w.resources)) == *w.resources);

  std::mt19937_64 rng(5);
  const auto pes = parse_resource_profile(R"({"pes": [{"id": 0}, {"id": 1}, {"id": 2}]})");
  for (int i = 0; i < 20; ++i) {
    const auto g = random_graph(rng, 1 + i % 9, 3);
    CHECK(parse_job_profile(serialize_job_profile(*g), pes) == *g);
  }
}

TEST_CASE("load_workload reports missing directories") {
  CHECK_THROWS_AS(load_workload(fixtures_dir() / "does-not-exist"), ProfileError);
}

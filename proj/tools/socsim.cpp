// socsim: experiment runner for the SoC DAG scheduling simulator.
//
//   socsim run --profiles fixtures/canonical --scheduler heft,met --scale 25,100 --out results.csv
//   socsim static-heft --profiles fixtures/canonical

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "socsim/experiment.hpp"

namespace {

using socsim::ExperimentSpec;

void apply_config_file(const std::filesystem::path& path, ExperimentSpec& spec, std::string& trace_format) {
  std::ifstream in(path);
  if (!in) {
    throw socsim::ConfigError("cannot open config file " + path.string());
  }
  const auto doc = nlohmann::json::parse(in);
  auto list = [](const nlohmann::json& v, auto sample) {
    using T = decltype(sample);
    return v.is_array() ? v.get<std::vector<T>>() : std::vector<T>{v.get<T>()};
  };
  if (doc.contains("profiles")) spec.profiles = doc["profiles"].get<std::string>();
  if (doc.contains("scheduler")) spec.schedulers = list(doc["scheduler"], std::string{});
  if (doc.contains("scale")) spec.scales = list(doc["scale"], double{});
  if (doc.contains("seed")) spec.seeds = list(doc["seed"], std::uint64_t{});
  if (doc.contains("sim_length")) spec.sim_length = doc["sim_length"].get<socsim::Tick>();
  if (doc.contains("queue_capacity")) spec.queue_capacity = doc["queue_capacity"].get<int>();
  if (doc.contains("pss")) spec.pss = doc["pss"].get<bool>();
  if (doc.contains("warmup")) spec.warmup_ticks = doc["warmup"].get<socsim::Tick>();
  if (doc.contains("drop_when_full")) spec.drop_when_full = doc["drop_when_full"].get<bool>();
  if (doc.contains("trace_dir")) spec.trace_dir = doc["trace_dir"].get<std::string>();
  if (doc.contains("trace_format")) trace_format = doc["trace_format"].get<std::string>();
  if (doc.contains("out")) spec.out = doc["out"].get<std::string>();
  if (doc.contains("jobs")) spec.jobs = doc["jobs"].get<unsigned>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for DAG jobs on heterogeneous SoC processing elements"};
  app.set_version_flag("--version", std::string(socsim::kVersion));
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Sweep schedulers x scales x seeds and write a results table");
  std::string config_path;
  std::string profiles;
  std::vector<std::string> schedulers;
  std::vector<double> scales;
  std::vector<std::uint64_t> seeds;
  socsim::Tick sim_length = 0;
  int queue_capacity = 0;
  bool pss = true;
  socsim::Tick warmup = 0;
  bool drop_when_full = false;
  std::string trace_dir;
  std::string trace_format = "csv";
  std::string out_path;
  unsigned jobs = 1;

  run->add_option("--config", config_path, "Run-config JSON document; flags override its values");
  auto* o_profiles = run->add_option("--profiles", profiles, "Profile directory (resources.json + jobs/*.json)");
  auto* o_sched = run->add_option("--scheduler", schedulers, "Scheduler names")->delimiter(',');
  auto* o_scale = run->add_option("--scale", scales, "Mean inter-arrival times in ticks")->delimiter(',');
  auto* o_seed = run->add_option("--seed", seeds, "Random seeds")->delimiter(',');
  auto* o_len = run->add_option("--sim-length", sim_length, "Episode horizon in ticks");
  auto* o_cap = run->add_option("--queue-capacity", queue_capacity, "Job queue length");
  auto* o_pss = run->add_flag("--pss,!--no-pss", pss, "Start from a full job queue (default on)");
  auto* o_warm = run->add_option("--warmup", warmup, "Ignore jobs injected before this tick");
  auto* o_drop = run->add_flag("--drop-when-full", drop_when_full, "Drop arrivals while the queue is full");
  auto* o_tdir = run->add_option("--trace-dir", trace_dir, "Write one trace file per run here");
  auto* o_tfmt = run->add_option("--trace-format", trace_format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  auto* o_out = run->add_option("--out", out_path, "Results table path (default: stdout)");
  auto* o_jobs = run->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  // static-heft
  auto* heft = app.add_subcommand("static-heft", "Print the whole-graph HEFT schedule of each job profile");
  std::string heft_profiles;
  heft->add_option("--profiles", heft_profiles, "Profile directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*heft) {
      const auto workload = socsim::load_workload(heft_profiles);
      for (const auto& g : workload.jobs) {
        const auto ranks = socsim::rank_upward(*g, *workload.resources);
        const auto plan = socsim::static_heft(*g, *workload.resources);
        std::cout << "profile " << g->name() << "\n";
        for (const auto& p : plan.placements) {
          std::cout << "  task " << p.task << " rank " << socsim::format_number(ranks[g->index_of(p.task)]) << " pe "
                    << p.pe << " [" << p.start << ", " << p.finish << ")\n";
        }
        std::cout << "  makespan " << plan.makespan << "\n";
      }
      return 0;
    }

    ExperimentSpec spec;
    std::string fmt = "csv";
    if (!config_path.empty()) {
      apply_config_file(config_path, spec, fmt);
    }
    if (o_profiles->count()) spec.profiles = profiles;
    if (o_sched->count()) spec.schedulers = schedulers;
    if (o_scale->count()) spec.scales = scales;
    if (o_seed->count()) spec.seeds = seeds;
    if (o_len->count()) spec.sim_length = sim_length;
    if (o_cap->count()) spec.queue_capacity = queue_capacity;
    if (o_pss->count()) spec.pss = pss;
    if (o_warm->count()) spec.warmup_ticks = warmup;
    if (o_drop->count()) spec.drop_when_full = drop_when_full;
    if (o_tdir->count()) spec.trace_dir = trace_dir;
    if (o_tfmt->count()) fmt = trace_format;
    if (o_out->count()) spec.out = out_path;
    if (o_jobs->count()) spec.jobs = jobs;
    spec.trace_format = socsim::trace_format_from_string(fmt);
    if (spec.profiles.empty()) {
      throw socsim::ConfigError("--profiles is required");
    }

    const auto registry = socsim::SchedulerRegistry::with_builtins();
    const auto rows = socsim::run_experiment(spec, registry);
    const auto table = socsim::format_results(rows);
    if (spec.out) {
      std::ofstream f(*spec.out, std::ios::binary);
      f << table;
      if (!f) {
        throw std::runtime_error("failed to write " + spec.out->string());
      }
    } else {
      std::cout << table;
    }
    bool failed = false;
    for (const auto& r : rows) {
      if (r.error) {
        std::cerr << "run " << r.scheduler << " scale " << r.scale << " seed " << r.seed << " failed: " << *r.error
                  << "\n";
        failed = true;
      }
    }
    return failed ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

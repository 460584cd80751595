#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "socsim/profiles.hpp"

namespace socsim {

using JobId = std::int64_t;

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GeneratorConfig {
  double scale = 50.0;      // mean inter-arrival time, ticks
  int queue_capacity = 3;   // T
  Tick sim_length = 5000;   // horizon; events at or after it are never applied
  std::uint64_t seed = 0;
  bool pss = true;
  Tick warmup_ticks = 0;
  bool drop_when_full = false;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Live (injected, not yet completed) jobs. size() <= capacity always.
struct JobQueue {
  std::vector<JobId> live_jobs;
  int capacity = 1;

  bool full() const { return static_cast<int>(live_jobs.size()) >= capacity; }
};

/// max(1, round(-scale * ln(u))) for u in (0, 1).
Tick interarrival_from_uniform(double u, double scale);

/// Uniform double in the open interval (0, 1) built from the top 52 bits.
double open_unit_interval(std::uint64_t bits);

Tick sample_interarrival(std::mt19937_64& rng, double scale);

/// Independent arrival-time and profile-choice streams derived from one seed,
/// so scheduler decisions can never perturb the arrival sequence.
class ArrivalStreams {
public:
  explicit ArrivalStreams(std::uint64_t seed);

  Tick next_interarrival(double scale) { return sample_interarrival(arrivals_, scale); }
  std::size_t pick_profile(std::size_t num_profiles);

private:
  std::mt19937_64 arrivals_;
  std::mt19937_64 choices_;
};

}  // namespace socsim

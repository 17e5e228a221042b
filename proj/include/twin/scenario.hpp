#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twin/time.hpp"

namespace twin {

// A full experiment description. Defaults are the reference configuration:
// 10 sources, 1 Gb/s channels, 1 KB packets and quantum, 2 us report+guard
// overhead, 1 ms grant delay tolerance, 2 Mb/s / 30 s non-backlogged flows,
// 10 MB backlogged flows.
struct Scenario {
  enum class Mode { SingleTree, Network };
  enum class JitterModel { None, Uniform };
  enum class ClockModel { Zero, Random };

  Mode mode = Mode::SingleTree;
  int sources = 10;      // single-tree: sources per tree
  int nodes = 10;        // network: source count and destination count
  int transmitters = 1;  // per source

  double delta_r_us = 2.0;
  double tau_ms = 1.0;
  std::int64_t quantum_bytes = 1000;
  std::int64_t packet_bytes = 1000;
  JitterModel jitter = JitterModel::None;
  double max_grant_us = 0.0;      // 0 = uncapped
  double retune_guard_us = 0.0;   // burned inside the remaining interval after a retune

  double capacity_gbps = 1.0;
  double load = 0.5;                 // per destination tree
  double backlogged_fraction = 1.0;  // share of load from backlogged flows
  double mean_flow_mb = 10.0;
  double nb_rate_mbps = 2.0;
  double nb_duration_s = 30.0;
  std::string size_dist = "exponential";  // or deterministic | hyperexponential

  double rtt_min_ms = 0.02;
  double rtt_max_ms = 1.0;
  ClockModel clocks = ClockModel::Zero;
  // Optional explicit one-way delays (overrides the random matrix):
  // map (from, to) -> microseconds.
  std::map<std::pair<int, int>, double> delay_us;

  double horizon_s = 200.0;
  double warmup_frac = 0.1;
  std::uint64_t seed = 1;
  int replications = 1;

  std::vector<double> sweep_loads;  // empty = single run at `load`
  std::vector<double> sweep_mixes;

  // Derived values.
  double capacity_bps() const { return capacity_gbps * 1e9; }
  TimeSpan delta_r() const { return from_us(delta_r_us); }
  TimeSpan tau() const { return from_ms(tau_ms); }
  TimeSpan horizon() const { return from_s(horizon_s); }
  TimeSpan warmup() const { return from_s(horizon_s * warmup_frac); }
  // The network is symmetric and bipartite in roles: every one of the
  // `nodes` sources is polled by every one of the `nodes` destinations, so
  // a source sees up to `nodes` concurrently granted intervals.
  int tree_count() const { return mode == Mode::Network ? nodes : 1; }
  int sources_per_tree() const { return mode == Mode::Network ? nodes : sources; }
  double quantum_time_us() const;
  double overhead_ratio_x() const;  // S * delta_r / quantum time

  void validate() const;
  std::string echo() const;          // canonical key=value dump
  std::uint64_t hash() const;        // FNV-1a over echo()
};

// Plain-text config: `key = value` lines, optional [section] headers (ignored
// for lookup), '#' or ';' comments. Unknown keys are an error.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

std::vector<double> parse_double_list(const std::string& csv);

}  // namespace twin

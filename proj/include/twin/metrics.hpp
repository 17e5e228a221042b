#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twin/time.hpp"

namespace twin {

// Results of one simulation run, measured inside [warmup, horizon].
struct RunMetrics {
  double load = 0.0;
  double mix = 1.0;  // backlogged fraction
  std::uint64_t seed = 0;

  // Non-backlogged packet delay: source arrival to last fragment at the
  // destination.
  std::int64_t nb_packets = 0;
  double nb_delay_sum_ms = 0.0;
  double mean_nb_delay_ms() const { return nb_packets ? nb_delay_sum_ms / nb_packets : 0.0; }
  bool low_confidence = false;  // fewer than 1e4 delay samples

  // Backlogged flows completed in-window. Flow throughput gamma is s/R(s);
  // since E[R | s] is proportional to s, the unbiased estimate of gamma is
  // the ratio of sums (per-flow averaging of s/R is inflated by response
  // time fluctuations).
  std::int64_t flows_completed = 0;
  double flow_bits_sum = 0.0;
  double response_sum_s = 0.0;
  double per_flow_rate_sum_mbps = 0.0;  // sum of individual s/R, diagnostic
  double mean_throughput_mbps() const {
    return response_sum_s > 0.0 ? flow_bits_sum / response_sum_s / 1e6 : 0.0;
  }
  double mean_per_flow_rate_mbps() const {
    return flows_completed ? per_flow_rate_sum_mbps / flows_completed : 0.0;
  }

  // Time-weighted distribution of the per-pair backlogged flow count,
  // pooled over all (source, destination) pairs.
  std::vector<double> flow_count_weight;
  std::int64_t flow_count_watermark = 0;  // recorded only; no control acts on it

  // Channel accounting per destination, summed over trees; exact in ns.
  TimeSpan busy = 0;
  TimeSpan overhead = 0;
  TimeSpan idle = 0;

  // Grant-time bookkeeping across all sources.
  TimeSpan granted = 0;
  TimeSpan blocked = 0;  // deficits: blocking + late grants
  TimeSpan forfeited = 0;
  double blocked_fraction() const {
    return granted ? static_cast<double>(blocked) / static_cast<double>(granted) : 0.0;
  }

  double mean_intervisit_us = 0.0;  // grant-to-grant time per source, averaged
  double delta_o_ms = 0.0;          // mean over destinations
  double max_delta_o_ms = 0.0;

  // Input-side tallies: bits offered by arrivals inside the measurement
  // window, per class. Gives each run's realized offered load.
  double offered_backlogged_bits = 0.0;
  double offered_nb_bits = 0.0;
  double realized_load(double capacity_bps, double window_s) const {
    return (offered_backlogged_bits + offered_nb_bits) / (capacity_bps * window_s);
  }

  int tx_peak_overlap = 0;

  // Invariant check tallies (each check throws on failure).
  std::int64_t overlap_checks = 0;
  std::int64_t edge_checks = 0;
  std::int64_t saturated_gap_checks = 0;
  std::int64_t conservation_checks = 0;
  std::int64_t feasibility_checks = 0;

  std::int64_t grants_issued = 0;
  std::int64_t grants_unserved = 0;
  std::int64_t bursts = 0;
};

// Mean and 95% confidence half-width over replications.
struct Estimate {
  double mean = 0.0;
  double ci95 = 0.0;
  int n = 0;
};
Estimate estimate(const std::vector<double>& samples);

// Replication-aggregated results for one sweep point.
struct SweepPoint {
  double load = 0.0;
  double mix = 1.0;
  Estimate nb_delay_ms;
  Estimate throughput_mbps;
  Estimate blocked_fraction;
  Estimate intervisit_us;
  std::vector<RunMetrics> runs;
};

}  // namespace twin

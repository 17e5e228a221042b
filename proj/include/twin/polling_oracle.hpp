#pragma once

#include <cstdint>
#include <vector>

#include "twin/rng.hpp"

namespace twin::oracle {

// Discrete-time polling system with snapshot reports: once per cycle the
// state of every source is snapshotted, the server gives one time unit to
// each snapshotted flow and pays a per-source switch overhead x_i. Flow
// sizes and overheads are integer time units.
struct PollingState {
  // flows[i] holds the remaining sizes (> 0) of the flows queued at source i.
  std::vector<std::vector<std::int64_t>> flows;

  std::int64_t flow_count() const;              // L(N)
  std::int64_t flow_count_at(int source) const; // L_i(N)
};

struct OracleParams {
  int sources = 5;
  std::vector<std::int64_t> overheads;  // x_i per source; x = sum
  std::vector<double> arrival_rate;     // lambda_i, flows per time unit
  double mean_size = 8.0;               // geometric on {1,2,...}
  std::int64_t total_overhead() const;
  double load() const;  // rho = sum(lambda_i) * mean_size

  static OracleParams symmetric(int sources, std::int64_t overhead_each, double rho,
                                double mean_size);
};

std::int64_t geometric_size(double mean, Rng& rng);

// One cycle: each flow present at the snapshot loses one unit (empty flows
// removed), arrivals during the cycle join the state but get no service.
// Returns the cycle length x + L(N).
std::int64_t run_cycle(PollingState& state, const OracleParams& params, Rng& rng);

// ||N|| = sum_i sum_p N_ip^2 + alpha N_ip.
double lyapunov_norm(const PollingState& state, double alpha);

// Monte-Carlo one-cycle drift of ||N|| from a fixed state, per unit time.
// The cycle length is deterministic given the state, so the estimate is
// mean(delta ||N||) / (x + L(N)).
struct DriftEstimate {
  double mean_per_unit_time = 0.0;
  double ci95_half = 0.0;
};
DriftEstimate drift_estimate(const PollingState& state, const OracleParams& params,
                             double alpha, int n_samples, Rng& rng);

// Long-run trace for stability experiments: samples (cycle, time, L, ||N||).
struct TraceSample {
  std::int64_t cycle = 0;
  std::int64_t time = 0;
  std::int64_t flow_count = 0;
  double norm = 0.0;
};
struct HorizonResult {
  std::vector<TraceSample> samples;      // decimated trace
  double time_avg_flow_count = 0.0;      // time-weighted over the whole run
  std::int64_t final_flow_count = 0;
  std::int64_t total_time = 0;
  std::int64_t cycles = 0;
  double mean_cycle_length = 0.0;
};
// Runs until both gates are met (a zero gate is ignored; at least one must
// be positive).
HorizonResult run_horizon(const OracleParams& params, std::int64_t min_time_units,
                          double alpha, std::uint64_t seed, int max_samples = 1000,
                          std::int64_t min_cycles = 0);

}  // namespace twin::oracle

#include "twin/polling_oracle.hpp"

#include <cmath>
#include <numeric>

#include "twin/error.hpp"

namespace twin::oracle {

std::int64_t PollingState::flow_count() const {
  std::int64_t n = 0;
  for (const auto& f : flows) n += static_cast<std::int64_t>(f.size());
  return n;
}

std::int64_t PollingState::flow_count_at(int source) const {
  return static_cast<std::int64_t>(flows.at(source).size());
}

std::int64_t OracleParams::total_overhead() const {
  return std::accumulate(overheads.begin(), overheads.end(), std::int64_t{0});
}

double OracleParams::load() const {
  double l = std::accumulate(arrival_rate.begin(), arrival_rate.end(), 0.0);
  return l * mean_size;
}

OracleParams OracleParams::symmetric(int sources, std::int64_t overhead_each, double rho,
                                     double mean_size) {
  OracleParams p;
  p.sources = sources;
  p.overheads.assign(sources, overhead_each);
  p.mean_size = mean_size;
  p.arrival_rate.assign(sources, rho / (sources * mean_size));
  return p;
}

// Geometric on {1,2,...} with the given mean: the integer analogue of the
// exponential size assumption.
std::int64_t geometric_size(double mean, Rng& rng) {
  if (mean <= 1.0) return 1;
  const double q = 1.0 - 1.0 / mean;  // P(size > k) = q^k
  double u = rng.uniform01();
  auto size = static_cast<std::int64_t>(std::floor(std::log1p(-u) / std::log(q))) + 1;
  return size < 1 ? 1 : size;
}

std::int64_t run_cycle(PollingState& state, const OracleParams& params, Rng& rng) {
  if (static_cast<int>(state.flows.size()) != params.sources)
    throw SimError("state/source count mismatch");
  const std::int64_t cycle = params.total_overhead() + state.flow_count();

  for (auto& source : state.flows) {
    std::size_t keep = 0;
    for (std::size_t p = 0; p < source.size(); ++p) {
      if (source[p] > 1) source[keep++] = source[p] - 1;
    }
    source.resize(keep);
  }
  // Arrivals during the cycle join the state; only their count within the
  // cycle matters since none are served before the next snapshot.
  for (int i = 0; i < params.sources; ++i) {
    const std::int64_t arrivals =
        rng.poisson(params.arrival_rate[i] * static_cast<double>(cycle));
    for (std::int64_t a = 0; a < arrivals; ++a)
      state.flows[i].push_back(geometric_size(params.mean_size, rng));
  }
  return cycle;
}

double lyapunov_norm(const PollingState& state, double alpha) {
  double norm = 0.0;
  for (const auto& source : state.flows)
    for (const auto rem : source)
      norm += static_cast<double>(rem) * static_cast<double>(rem) +
              alpha * static_cast<double>(rem);
  return norm;
}

DriftEstimate drift_estimate(const PollingState& state, const OracleParams& params,
                             double alpha, int n_samples, Rng& rng) {
  if (n_samples < 2) throw SimError("drift estimate needs n_samples >= 2");
  const double norm0 = lyapunov_norm(state, alpha);
  const auto cycle = static_cast<double>(params.total_overhead() + state.flow_count());

  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    PollingState trial = state;
    run_cycle(trial, params, rng);
    const double delta = lyapunov_norm(trial, alpha) - norm0;
    sum += delta;
    sum_sq += delta * delta;
  }
  const double mean = sum / n_samples;
  const double var = (sum_sq - sum * sum / n_samples) / (n_samples - 1);
  DriftEstimate out;
  out.mean_per_unit_time = mean / cycle;
  out.ci95_half = 1.96 * std::sqrt(var / n_samples) / cycle;
  return out;
}

HorizonResult run_horizon(const OracleParams& params, std::int64_t min_time_units,
                          double alpha, std::uint64_t seed, int max_samples,
                          std::int64_t min_cycles) {
  if (min_time_units <= 0 && min_cycles <= 0)
    throw SimError("run_horizon needs a positive time or cycle gate");
  Rng rng(seed);
  PollingState state;
  state.flows.assign(params.sources, {});

  HorizonResult out;
  double weighted = 0.0;
  std::int64_t sample_stride = 1;

  while (out.total_time < min_time_units || out.cycles < min_cycles) {
    const std::int64_t count_before = state.flow_count();
    const std::int64_t cycle = run_cycle(state, params, rng);
    weighted += static_cast<double>(count_before) * static_cast<double>(cycle);
    out.total_time += cycle;
    ++out.cycles;
    if (out.cycles % sample_stride == 0) {
      out.samples.push_back(TraceSample{out.cycles, out.total_time, state.flow_count(),
                                        lyapunov_norm(state, alpha)});
      if (static_cast<int>(out.samples.size()) >= max_samples) {
        // Decimate in place and double the stride to bound the trace size.
        std::vector<TraceSample> kept;
        for (std::size_t i = 1; i < out.samples.size(); i += 2)
          kept.push_back(out.samples[i]);
        out.samples = std::move(kept);
        sample_stride *= 2;
      }
    }
  }
  out.time_avg_flow_count = weighted / static_cast<double>(out.total_time);
  out.final_flow_count = state.flow_count();
  out.mean_cycle_length =
      static_cast<double>(out.total_time) / static_cast<double>(out.cycles);
  return out;
}

}  // namespace twin::oracle

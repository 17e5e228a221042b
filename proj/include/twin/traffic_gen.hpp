#pragma once

#include <cstdint>

#include "twin/rng.hpp"
#include "twin/time.hpp"

namespace twin {

// Offered traffic for one (source, destination) pair, as fractions of the
// channel rate. backlogged + nonbacklogged must not exceed 1 network-wide.
struct TrafficMixEntry {
  double backlogged_load = 0.0;     // rho_i^B
  double nonbacklogged_load = 0.0;  // rho_i^N
  double mean_flow_bytes = 10e6;    // backlogged flow size, exponential mean
  double nb_flow_rate_bps = 2e6;    // per non-backlogged flow
  double nb_flow_duration_s = 30.0; // mean holding time of the M/M/infinity population
  std::int64_t packet_bytes = 1000;

  double flow_arrival_per_s(double capacity_bps) const {
    return backlogged_load * capacity_bps / (8.0 * mean_flow_bytes);
  }
  double mean_nb_population(double capacity_bps) const {
    return nonbacklogged_load * capacity_bps / nb_flow_rate_bps;
  }
  double packets_per_s_per_flow() const {
    return nb_flow_rate_bps / (8.0 * static_cast<double>(packet_bytes));
  }
};

// Poisson flow arrivals with i.i.d. sizes. Sizes round up to whole bytes,
// arrival gaps to whole nanoseconds.
class BackloggedFlowGen {
 public:
  enum class SizeDist { Exponential, Deterministic, Hyperexponential };

  BackloggedFlowGen(const TrafficMixEntry& mix, double capacity_bps, std::uint64_t seed,
                    SizeDist dist = SizeDist::Exponential);

  bool active() const { return rate_per_s_ > 0.0; }
  struct FlowArrival {
    TimePoint at;
    std::int64_t bytes;
  };
  FlowArrival next();  // consumes the stream

 private:
  double rate_per_s_;
  double mean_bytes_;
  SizeDist dist_;
  Rng rng_;
  TimePoint t_ = 0;
};

// Composite non-backlogged packet stream: a hidden M/M/infinity population
// K(t) modulates a Poisson packet process of rate K(t) * per-flow rate.
// Population changes and packet arrivals are interleaved exactly; after each
// population change the next packet gap is redrawn, which is distribution-
// exact by memorylessness. The initial population is drawn stationary.
class NbTrafficGen {
 public:
  NbTrafficGen(const TrafficMixEntry& mix, double capacity_bps, std::uint64_t seed);

  bool active() const { return mean_population_ > 0.0; }
  std::int64_t population() const { return population_; }
  std::int64_t packet_bytes() const { return packet_bytes_; }

  struct PacketArrival {
    TimePoint at;
    std::int64_t bytes;
  };
  PacketArrival next();  // consumes the stream

 private:
  void advance_population();

  double mean_population_ = 0.0;
  double flow_arrival_per_s_ = 0.0;  // nu = E[K] / mean holding time
  double departure_rate_per_s_ = 0.0;
  double packets_per_flow_s_ = 0.0;
  std::int64_t packet_bytes_ = 1000;
  Rng rng_;
  TimePoint t_ = 0;
  std::int64_t population_ = 0;
};

}  // namespace twin

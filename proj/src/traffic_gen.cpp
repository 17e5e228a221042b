#include "twin/traffic_gen.hpp"

#include <cmath>

#include "twin/error.hpp"

namespace twin {

BackloggedFlowGen::BackloggedFlowGen(const TrafficMixEntry& mix, double capacity_bps,
                                     std::uint64_t seed, SizeDist dist)
    : rate_per_s_(mix.flow_arrival_per_s(capacity_bps)),
      mean_bytes_(mix.mean_flow_bytes),
      dist_(dist),
      rng_(seed) {}

BackloggedFlowGen::FlowArrival BackloggedFlowGen::next() {
  if (!active()) throw SimError("backlogged generator with zero load");
  t_ += std::llround(rng_.exponential(1e9 / rate_per_s_));
  double bytes;
  switch (dist_) {
    case SizeDist::Deterministic:
      bytes = mean_bytes_;
      break;
    case SizeDist::Hyperexponential:
      // Two-phase balanced hyperexponential with squared CoV 4, for
      // insensitivity experiments: p = (1+sqrt(3/5))/2, phase means m/(2p).
      if (rng_.uniform01() < 0.8872983346)
        bytes = rng_.exponential(mean_bytes_ * 0.5635083269);
      else
        bytes = rng_.exponential(mean_bytes_ * 4.4364916731);
      break;
    case SizeDist::Exponential:
    default:
      bytes = rng_.exponential(mean_bytes_);
      break;
  }
  auto rounded = static_cast<std::int64_t>(std::ceil(bytes));
  if (rounded < 1) rounded = 1;
  return FlowArrival{t_, rounded};
}

NbTrafficGen::NbTrafficGen(const TrafficMixEntry& mix, double capacity_bps,
                           std::uint64_t seed)
    : mean_population_(mix.mean_nb_population(capacity_bps)),
      packets_per_flow_s_(mix.packets_per_s_per_flow()),
      packet_bytes_(mix.packet_bytes),
      rng_(seed) {
  if (mix.nb_flow_duration_s <= 0.0) throw SimError("nb flow duration must be positive");
  flow_arrival_per_s_ = mean_population_ / mix.nb_flow_duration_s;
  departure_rate_per_s_ = 1.0 / mix.nb_flow_duration_s;
  if (active()) population_ = rng_.poisson(mean_population_);  // stationary start
}

void NbTrafficGen::advance_population() {
  const double up = flow_arrival_per_s_;
  const double down = departure_rate_per_s_ * static_cast<double>(population_);
  if (rng_.uniform01() * (up + down) < up)
    ++population_;
  else
    --population_;
}

NbTrafficGen::PacketArrival NbTrafficGen::next() {
  if (!active()) throw SimError("non-backlogged generator with zero load");
  for (;;) {
    if (population_ == 0) {
      // Only a flow arrival can happen; packets wait for a live flow.
      t_ += std::llround(rng_.exponential(1e9 / flow_arrival_per_s_));
      ++population_;
      continue;
    }
    const double pkt_rate = packets_per_flow_s_ * static_cast<double>(population_);
    const double change_rate =
        flow_arrival_per_s_ + departure_rate_per_s_ * static_cast<double>(population_);
    const TimeSpan pkt_gap = std::llround(rng_.exponential(1e9 / pkt_rate));
    const TimeSpan change_gap = std::llround(rng_.exponential(1e9 / change_rate));
    if (pkt_gap <= change_gap) {
      t_ += pkt_gap;
      return PacketArrival{t_, packet_bytes_};
    }
    t_ += change_gap;
    advance_population();
  }
}

}  // namespace twin

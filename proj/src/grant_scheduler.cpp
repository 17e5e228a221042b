#include "twin/grant_scheduler.hpp"

#include <algorithm>

#include "twin/error.hpp"

namespace twin {

int next_source(int current, int source_count, Rng& rng) {
  if (source_count < 1) throw SimError("need at least one source");
  if (source_count == 1) return 0;
  if (current < 0) return static_cast<int>(rng.below(source_count));
  auto pick = static_cast<int>(rng.below(source_count - 1));
  return pick < current ? pick : pick + 1;
}

TimeSpan AllocationLedger::drain(int source, TimeSpan quantum_time, TimeSpan max_grant) {
  Entry& e = entries_.at(source);
  TimeSpan target = e.pending + quantum_time * e.backlogged;
  TimeSpan d = (max_grant > 0 && target > max_grant) ? max_grant : target;
  // Credits beyond a cap stay pending; quantum time is recomputed from the
  // next report anyway.
  e.pending -= std::min(e.pending, d);
  return d;
}

TimeSpan GrantState::minimal_offset(const std::vector<TimeSpan>& rtt, TimeSpan tau) {
  TimeSpan max_rtt = 0;
  for (auto r : rtt) max_rtt = std::max(max_rtt, r);
  return max_rtt + tau;
}

GrantState::Epochs GrantState::advance(int source, TimeSpan d_next) {
  TWIN_CHECK(d_next >= 0, "negative grant duration");
  TWIN_CHECK(delta_r > 0, "delta_r must be positive");
  TWIN_CHECK(delta_o >= minimal_offset(rtt, tau), "offset below max RTT + tau");
  Epochs e{};
  e.g_next = g + d_last + delta_r;
  e.s_next = e.g_next + delta_o - rtt.at(source);
  g = e.g_next;
  d_last = d_next;
  last_source = source;
  ++grants_issued;
  return e;
}

TimePoint grant_delivery_time(TimePoint g_epoch_global, TimeSpan delta_ji, TimeSpan u) {
  TWIN_CHECK(u >= 0, "negative signalling increment");
  return g_epoch_global + delta_ji + u;
}

}  // namespace twin

#include "twin/clock_sync.hpp"

#include "twin/error.hpp"

namespace twin {

PropagationMatrix::PropagationMatrix(int nodes, TimeSpan fill)
    : nodes_(nodes), d_(static_cast<std::size_t>(nodes) * nodes, fill) {
  if (nodes < 2) throw SimError("propagation matrix needs at least 2 nodes");
  if (fill <= 0) throw SimError("propagation delays must be strictly positive");
  for (int i = 0; i < nodes; ++i) d_[i * nodes_ + i] = 0;
}

void PropagationMatrix::set_delay(int from, int to, TimeSpan v) {
  if (from == to) throw SimError("no self delay");
  if (v <= 0) throw SimError("propagation delays must be strictly positive");
  d_[from * nodes_ + to] = v;
}

PropagationMatrix PropagationMatrix::generate(int nodes, TimeSpan rtt_min,
                                              TimeSpan rtt_max, Rng& rng) {
  if (rtt_min < 2 || rtt_max < rtt_min) throw SimError("bad RTT range");
  PropagationMatrix m(nodes, 1);
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j) {
      const auto rtt = rtt_min +
          static_cast<TimeSpan>(rng.below(static_cast<std::uint64_t>(rtt_max - rtt_min) + 1));
      // Asymmetric split, both halves strictly positive.
      const auto fwd = 1 + static_cast<TimeSpan>(rng.below(static_cast<std::uint64_t>(rtt - 1)));
      m.set_delay(i, j, fwd);
      m.set_delay(j, i, rtt - fwd);
    }
  }
  return m;
}

LocalClockSet::LocalClockSet(int node, int total_nodes, TimeSpan dest_offset)
    : node_(node),
      dest_offset_(dest_offset),
      source_offset_(total_nodes, 0),
      synced_(total_nodes, false) {}

int LocalClockSet::clock_count() const {
  return 1 + static_cast<int>(source_offset_.size()) - 1;
}

TimeSpan LocalClockSet::source_offset(int dest) const {
  if (!synced_.at(dest)) throw SimError("source clock not yet synchronized");
  return source_offset_[dest];
}

TimePoint LocalClockSet::source_now(int dest, TimePoint global) const {
  return global + source_offset(dest);
}

TimePoint LocalClockSet::source_to_global(int dest, TimePoint local) const {
  return local - source_offset(dest);
}

void LocalClockSet::apply_timestamp(int dest, TimePoint t1, TimePoint global_now) {
  source_offset_.at(dest) = t1 - global_now;
  synced_.at(dest) = true;
}

TimeSpan measure_rtt(TimePoint t2, TimePoint t3) {
  TWIN_CHECK(t3 >= t2, "negative RTT: report echoed before it was sent");
  return t3 - t2;
}

}  // namespace twin

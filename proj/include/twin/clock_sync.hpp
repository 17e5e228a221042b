#pragma once

#include <vector>

#include "twin/rng.hpp"
#include "twin/time.hpp"

namespace twin {

// One-way propagation delays delta[i][j] between every ordered node pair.
// Entries are strictly positive and need not be symmetric. Protocol logic
// never reads these directly; schedulers see only measured round-trip times.
class PropagationMatrix {
 public:
  PropagationMatrix(int nodes, TimeSpan fill);

  // Random matrix with per-pair RTT uniform in [rtt_min, rtt_max], split into
  // asymmetric halves: delay(i,j) = u*rtt, delay(j,i) = rtt - u*rtt.
  static PropagationMatrix generate(int nodes, TimeSpan rtt_min, TimeSpan rtt_max,
                                    Rng& rng);

  int nodes() const { return nodes_; }
  TimeSpan delay(int from, int to) const { return d_[from * nodes_ + to]; }
  void set_delay(int from, int to, TimeSpan v);
  TimeSpan rtt(int i, int j) const { return delay(i, j) + delay(j, i); }

 private:
  int nodes_;
  std::vector<TimeSpan> d_;
};

// Per-node clock set: one destination-role clock plus one source-role clock
// per remote destination, each an offset against the simulator's global
// axis. Offsets are drift-free; a timestamp exchange fixes them for the run.
class LocalClockSet {
 public:
  LocalClockSet(int node, int total_nodes, TimeSpan dest_offset = 0);

  int node() const { return node_; }
  int clock_count() const;  // 1 destination-role + one per remote destination

  TimeSpan dest_offset() const { return dest_offset_; }
  TimePoint dest_now(TimePoint global) const { return global + dest_offset_; }

  TimeSpan source_offset(int dest) const;
  TimePoint source_now(int dest, TimePoint global) const;
  TimePoint source_to_global(int dest, TimePoint local) const;

  // Receipt of a timestamped message from destination `dest`: the clock
  // toward that destination reads t1 at the instant of receipt. Latest wins.
  void apply_timestamp(int dest, TimePoint t1, TimePoint global_now);

 private:
  int node_;
  TimeSpan dest_offset_;
  std::vector<TimeSpan> source_offset_;
  std::vector<bool> synced_;
};

// RTT from the echoed stamp pair of the bootstrap exchange: t2 is the source
// clock at emission, t3 the destination clock at receipt; the result equals
// delta_ij + delta_ji exactly. A negative value is a protocol-ordering bug.
TimeSpan measure_rtt(TimePoint t2, TimePoint t3);

}  // namespace twin

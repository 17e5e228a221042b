#pragma once

#include <cstdint>
#include <vector>

#include "twin/rng.hpp"
#include "twin/time.hpp"

namespace twin {

// In-band report: channel time of non-backlogged arrivals plus deficits
// accrued since the last report, and the instantaneous backlogged flow count.
struct Report {
  TimeSpan time_credit = 0;
  std::int64_t backlogged_flows = 0;
};

// A destination-issued transmission permission. s_local is on the source's
// clock toward this destination; d is the data portion, the report and guard
// overhead ride on top of it.
struct Grant {
  int dest = 0;
  int source = 0;
  std::uint64_t seq = 0;
  TimePoint formulated = 0;  // g(n), destination clock
  TimePoint s_local = 0;     // s(n), source clock
  TimeSpan d = 0;
};

// Uniform pick over all sources except the current one; the first grant of a
// run (current < 0) is uniform over all of them. S = 1 degenerates to the
// single source.
int next_source(int current, int source_count, Rng& rng);

// Per-source accumulation of reports between grants. Time credits add up;
// the backlogged count is the latest snapshot and persists until a newer
// report replaces it. Draining on grant issue keeps every reported second
// granted exactly once.
class AllocationLedger {
 public:
  explicit AllocationLedger(int sources) : entries_(sources) {}

  void credit(int source, const Report& r) {
    entries_[source].pending += r.time_credit;
    entries_[source].backlogged = r.backlogged_flows;
  }

  // d = accumulated credits + quantum_time * latest backlogged count,
  // optionally capped; the uncovered credit stays in the ledger.
  TimeSpan drain(int source, TimeSpan quantum_time, TimeSpan max_grant = 0);

  TimeSpan pending(int source) const { return entries_[source].pending; }
  std::int64_t backlogged(int source) const { return entries_[source].backlogged; }

 private:
  struct Entry {
    TimeSpan pending = 0;
    std::int64_t backlogged = 0;
  };
  std::vector<Entry> entries_;
};

// Grant recursion state for one destination. The offset delta_o must cover
// max RTT plus the grant delay tolerance tau for the schedule to be feasible.
struct GrantState {
  int dest = 0;
  TimePoint g = 0;        // formulation epoch of the last grant, destination clock
  TimeSpan d_last = 0;
  TimeSpan delta_r = 0;
  TimeSpan delta_o = 0;
  TimeSpan tau = 0;
  std::vector<TimeSpan> rtt;  // per source
  int last_source = -1;
  std::uint64_t grants_issued = 0;

  static TimeSpan minimal_offset(const std::vector<TimeSpan>& rtt, TimeSpan tau);

  // g(n+1) = g(n) + d(n) + delta_r; s(n+1) = g(n+1) + delta_o - rtt.
  struct Epochs {
    TimePoint g_next;
    TimePoint s_next;
  };
  Epochs advance(int source, TimeSpan d_next);
};

// Arrival time of a grant released at g_epoch (global time) over the
// out-of-band channel: propagation delta_ji plus a signalling increment
// u in [0, tau].
TimePoint grant_delivery_time(TimePoint g_epoch_global, TimeSpan delta_ji, TimeSpan u);

}  // namespace twin

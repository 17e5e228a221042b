#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "twin/grant_scheduler.hpp"
#include "twin/time.hpp"

namespace twin {

// Per-(source, destination) buffer state. Non-backlogged packets queue FIFO
// and may be left mid-packet when a grant runs out; backlogged flows sit in
// a round-robin ring served one quantum per visit, with the cursor persisting
// across grants (including mid-quantum).
struct NbPacket {
  std::uint64_t id = 0;
  TimePoint arrival = 0;
  std::int64_t bytes = 0;
  std::int64_t sent = 0;
};

struct BackloggedFlow {
  std::uint64_t id = 0;
  TimePoint arrival = 0;
  std::int64_t size = 0;
  std::int64_t remaining = 0;
};

struct DestinationQueue {
  std::deque<NbPacket> nb;
  std::vector<BackloggedFlow> ring;  // arrival order; new flows append
  std::size_t cursor = 0;
  std::int64_t cursor_sent = 0;  // bytes already charged of the cursor flow's quantum

  TimeSpan nb_since_report = 0;
  TimeSpan deficit_since_report = 0;

  void add_packet(std::uint64_t id, TimePoint arrival, std::int64_t bytes,
                  const ChannelRate& rate);
  void add_flow(std::uint64_t id, TimePoint arrival, std::int64_t bytes);
};

// One emitted fragment. `offset` is the byte range start within the packet
// or flow; `completes` marks the last byte of the packet/flow leaving the
// source. Fragments pack contiguously from the burst start.
struct BurstItem {
  enum class Kind { NbFragment, FlowFragment } kind = Kind::NbFragment;
  std::uint64_t id = 0;
  TimePoint origin_arrival = 0;
  std::int64_t offset = 0;
  std::int64_t bytes = 0;
  bool completes = false;
};

struct Burst {
  std::vector<BurstItem> items;
  TimeSpan payload_time = 0;  // actual transmission time of the items
  TimeSpan forfeit_time = 0;  // granted time with nothing to carry (usable - payload)
};

// Fills `usable` of grant time: queued non-backlogged packets first (oldest
// first, fragmenting freely), then quanta of backlogged flows round-robin
// from the saved cursor. A flow whose remainder is short of a quantum sends
// what it has and forfeits the residual quantum time.
Burst build_burst(DestinationQueue& q, TimeSpan usable, std::int64_t quantum_bytes,
                  const ChannelRate& rate);

// Snapshot taken the instant the report field is emitted; both accumulators
// reset, the count is instantaneous.
Report build_report(DestinationQueue& q);

// deficit += nominal - used; covers transmitter blocking and late grants.
void record_deficit(DestinationQueue& q, TimeSpan nominal, TimeSpan used);

// Transmitter pool bookkeeping: the engine drives service decisions, this
// tracks occupancy and enforces the hard bound.
class TransmitterPool {
 public:
  explicit TransmitterPool(int count) : count_(count) {}
  int count() const { return count_; }
  int busy() const { return busy_; }
  bool has_idle() const { return busy_ < count_; }
  void acquire();
  void release();
  int peak() const { return peak_; }

 private:
  int count_;
  int busy_ = 0;
  int peak_ = 0;
};

}  // namespace twin

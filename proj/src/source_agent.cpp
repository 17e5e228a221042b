#include "twin/source_agent.hpp"

#include <algorithm>

#include "twin/error.hpp"

namespace twin {

void DestinationQueue::add_packet(std::uint64_t id, TimePoint arrival, std::int64_t bytes,
                                  const ChannelRate& rate) {
  nb.push_back(NbPacket{id, arrival, bytes, 0});
  nb_since_report += rate.bytes_time(bytes);
}

void DestinationQueue::add_flow(std::uint64_t id, TimePoint arrival, std::int64_t bytes) {
  ring.push_back(BackloggedFlow{id, arrival, bytes, bytes});
}

Burst build_burst(DestinationQueue& q, TimeSpan usable, std::int64_t quantum_bytes,
                  const ChannelRate& rate) {
  TWIN_CHECK(usable >= 0, "negative usable grant time");
  Burst burst;
  TimeSpan left = usable;

  // Non-backlogged packets, oldest first, last one fragmented to fit.
  while (left > 0 && !q.nb.empty()) {
    NbPacket& pkt = q.nb.front();
    const std::int64_t room = rate.bytes_in(left);
    if (room == 0) break;
    const std::int64_t send = std::min(pkt.bytes - pkt.sent, room);
    const bool completes = pkt.sent + send == pkt.bytes;
    burst.items.push_back(BurstItem{BurstItem::Kind::NbFragment, pkt.id, pkt.arrival,
                                    pkt.sent, send, completes});
    left -= rate.bytes_time(send);
    pkt.sent += send;
    if (completes)
      q.nb.pop_front();
    else
      break;
  }

  // Quanta of backlogged flows, round robin from the cursor. Each visit
  // charges up to one quantum against the remaining time; a completing flow
  // forfeits the unused residue of its quantum.
  while (left > 0 && !q.ring.empty()) {
    const std::int64_t room = rate.bytes_in(left);
    if (room == 0) break;
    q.cursor %= q.ring.size();
    BackloggedFlow& flow = q.ring[q.cursor];
    const std::int64_t quantum_left = quantum_bytes - q.cursor_sent;
    const std::int64_t charge = std::min(quantum_left, room);
    const std::int64_t send = std::min(charge, flow.remaining);
    if (send > 0) {
      burst.items.push_back(BurstItem{BurstItem::Kind::FlowFragment, flow.id, flow.arrival,
                                      flow.size - flow.remaining, send,
                                      flow.remaining == send});
      flow.remaining -= send;
    }
    left -= rate.bytes_time(charge);
    q.cursor_sent += charge;
    if (flow.remaining == 0) {
      q.ring.erase(q.ring.begin() + static_cast<std::ptrdiff_t>(q.cursor));
      q.cursor_sent = 0;
      if (q.ring.empty()) q.cursor = 0;
    } else if (q.cursor_sent == quantum_bytes) {
      q.cursor_sent = 0;
      q.cursor = (q.cursor + 1) % q.ring.size();
    }
  }

  for (const auto& item : burst.items) burst.payload_time += rate.bytes_time(item.bytes);
  burst.forfeit_time = usable - burst.payload_time;
  TWIN_CHECK(burst.forfeit_time >= 0, "burst payload exceeds usable grant time");
  return burst;
}

Report build_report(DestinationQueue& q) {
  Report r;
  r.time_credit = q.nb_since_report + q.deficit_since_report;
  r.backlogged_flows = static_cast<std::int64_t>(q.ring.size());
  q.nb_since_report = 0;
  q.deficit_since_report = 0;
  return r;
}

void record_deficit(DestinationQueue& q, TimeSpan nominal, TimeSpan used) {
  TWIN_CHECK(used <= nominal, "used more grant time than nominally available");
  q.deficit_since_report += nominal - used;
}

void TransmitterPool::acquire() {
  TWIN_CHECK(busy_ < count_, "transmitter overlap bound violated");
  ++busy_;
  peak_ = std::max(peak_, busy_);
}

void TransmitterPool::release() {
  TWIN_CHECK(busy_ > 0, "releasing an idle transmitter pool");
  --busy_;
}

}  // namespace twin

#include "doctest.h"

#include "twin/error.hpp"
#include "twin/source_agent.hpp"

using namespace twin;

namespace {

const ChannelRate kGig{1'000'000'000};  // 8 ns per byte

DestinationQueue with_flows(std::initializer_list<std::int64_t> sizes) {
  DestinationQueue q;
  std::uint64_t id = 1;
  for (auto s : sizes) q.add_flow(id++, 0, s);
  return q;
}

}  // namespace

TEST_CASE("burst serves non-backlogged packets first, then quanta round robin") {
  // usable = 5 packet-times, 3 packets queued, 4 backlogged flows, q = 1 KB:
  // 3 packets + quanta to the flows at cursor and cursor+1.
  DestinationQueue q = with_flows({1'000'000, 1'000'000, 1'000'000, 1'000'000});
  for (int i = 0; i < 3; ++i) q.add_packet(100 + i, 0, 1000, kGig);
  Burst b = build_burst(q, 5 * 8000, 1000, kGig);
  REQUIRE(b.items.size() == 5);
  CHECK(b.items[0].kind == BurstItem::Kind::NbFragment);
  CHECK(b.items[2].kind == BurstItem::Kind::NbFragment);
  CHECK(b.items[3].kind == BurstItem::Kind::FlowFragment);
  CHECK(b.items[3].id == 1);
  CHECK(b.items[4].id == 2);
  CHECK(q.cursor == 2);
  CHECK(b.payload_time == 5 * 8000);
  CHECK(b.forfeit_time == 0);
}

TEST_CASE("round robin resumes from the cursor and fragments the last quantum") {
  // usable = 3.5 packet-times, no packets, flows {f1..f4}, cursor at f3:
  // f3, f4, f1 full quanta plus the first half of f2's quantum.
  DestinationQueue q = with_flows({1'000'000, 1'000'000, 1'000'000, 1'000'000});
  q.cursor = 2;
  Burst b = build_burst(q, 3 * 8000 + 4000, 1000, kGig);
  REQUIRE(b.items.size() == 4);
  CHECK(b.items[0].id == 3);
  CHECK(b.items[1].id == 4);
  CHECK(b.items[2].id == 1);
  CHECK(b.items[3].id == 2);
  CHECK(b.items[3].bytes == 500);
  CHECK(q.cursor == 1);  // still f2, mid-quantum
  CHECK(q.cursor_sent == 500);
  CHECK(b.forfeit_time == 0);

  // The next grant picks up exactly where service ended.
  Burst b2 = build_burst(q, 8000, 1000, kGig);
  REQUIRE(b2.items.size() == 2);
  CHECK(b2.items[0].id == 2);
  CHECK(b2.items[0].bytes == 500);  // second half of f2's quantum
  CHECK(b2.items[1].id == 3);
  CHECK(b2.items[1].bytes == 500);
}

TEST_CASE("a completing flow forfeits the residue of its quantum") {
  // usable = 2 packet-times, f1 has half a packet left, f2 is backlogged:
  // f1's 500 B complete the flow, f2 sends one quantum, half a packet-time
  // of the grant goes unused.
  DestinationQueue q;
  q.add_flow(1, 0, 500);
  q.add_flow(2, 0, 1'000'000);
  Burst b = build_burst(q, 2 * 8000, 1000, kGig);
  REQUIRE(b.items.size() == 2);
  CHECK(b.items[0].id == 1);
  CHECK(b.items[0].bytes == 500);
  CHECK(b.items[0].completes);
  CHECK(b.items[1].id == 2);
  CHECK(b.items[1].bytes == 1000);
  CHECK(b.payload_time == 12000);
  CHECK(b.forfeit_time == 4000);
  CHECK(q.ring.size() == 1);
}

TEST_CASE("large grants keep the quantum stream going around the ring") {
  DestinationQueue q = with_flows({1'000'000, 1'000'000});
  Burst b = build_burst(q, 5 * 8000, 1000, kGig);
  REQUIRE(b.items.size() == 5);  // f1 f2 f1 f2 f1
  CHECK(b.items[0].id == 1);
  CHECK(b.items[1].id == 2);
  CHECK(b.items[2].id == 1);
  CHECK(b.forfeit_time == 0);
}

TEST_CASE("non-backlogged packets fragment and resume across bursts") {
  DestinationQueue q;
  q.add_packet(9, 0, 1000, kGig);
  CHECK(q.nb_since_report == 8000);
  Burst b1 = build_burst(q, 3000, 1000, kGig);
  REQUIRE(b1.items.size() == 1);
  CHECK(b1.items[0].bytes == 375);
  CHECK_FALSE(b1.items[0].completes);
  Burst b2 = build_burst(q, 8000, 1000, kGig);
  REQUIRE(b2.items.size() == 1);
  CHECK(b2.items[0].offset == 375);
  CHECK(b2.items[0].bytes == 625);
  CHECK(b2.items[0].completes);
  CHECK(q.nb.empty());
}

TEST_CASE("usable zero yields a report-only burst") {
  DestinationQueue q = with_flows({1000});
  q.add_packet(1, 0, 1000, kGig);
  Burst b = build_burst(q, 0, 1000, kGig);
  CHECK(b.items.empty());
  CHECK(b.payload_time == 0);
  CHECK(b.forfeit_time == 0);
}

TEST_CASE("report snapshots and resets the accumulators") {
  DestinationQueue q;
  q.add_packet(1, 0, 1000, kGig);
  q.add_packet(2, 0, 1000, kGig);
  for (int i = 0; i < 7; ++i) q.add_flow(10 + i, 0, 1'000'000);
  Report r = build_report(q);
  CHECK(r.time_credit == 16 * kMicro);
  CHECK(r.backlogged_flows == 7);
  CHECK(q.nb_since_report == 0);

  // Deficit folds into the next report's credit.
  record_deficit(q, 10 * kMicro, 6 * kMicro);
  Report r2 = build_report(q);
  CHECK(r2.time_credit == 4 * kMicro);
  CHECK(r2.backlogged_flows == 7);

  // An idle source still reports (0, 0).
  DestinationQueue idle;
  Report r3 = build_report(idle);
  CHECK(r3.time_credit == 0);
  CHECK(r3.backlogged_flows == 0);
}

TEST_CASE("record_deficit rejects impossible accounting") {
  DestinationQueue q;
  record_deficit(q, 10, 10);
  CHECK(q.deficit_since_report == 0);
  record_deficit(q, 10, 0);  // fully blocked grant
  CHECK(q.deficit_since_report == 10);
  CHECK_THROWS_AS(record_deficit(q, 5, 6), InvariantViolation);
}

TEST_CASE("transmitter pool enforces the overlap bound") {
  TransmitterPool pool(2);
  pool.acquire();
  pool.acquire();
  CHECK_FALSE(pool.has_idle());
  CHECK_THROWS_AS(pool.acquire(), InvariantViolation);
  pool.release();
  CHECK(pool.has_idle());
  CHECK(pool.peak() == 2);
  pool.release();
  CHECK_THROWS_AS(pool.release(), InvariantViolation);
}

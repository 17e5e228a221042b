#include "doctest.h"

#include <cmath>

#include "twin/experiment.hpp"
#include "twin/sim_engine.hpp"

using namespace twin;

namespace {

Scenario small_tree(double horizon_s = 2.0) {
  Scenario sc;
  sc.mode = Scenario::Mode::SingleTree;
  sc.sources = 4;
  sc.mean_flow_mb = 0.5;
  sc.horizon_s = horizon_s;
  sc.seed = 5;
  return sc;
}

Scenario small_network(double horizon_s = 2.0) {
  Scenario sc;
  sc.mode = Scenario::Mode::Network;
  sc.nodes = 4;
  sc.transmitters = 1;
  sc.mean_flow_mb = 0.5;
  sc.horizon_s = horizon_s;
  sc.seed = 5;
  return sc;
}

bool metrics_equal(const RunMetrics& a, const RunMetrics& b) {
  return a.nb_packets == b.nb_packets && a.nb_delay_sum_ms == b.nb_delay_sum_ms &&
         a.flows_completed == b.flows_completed && a.flow_bits_sum == b.flow_bits_sum &&
         a.response_sum_s == b.response_sum_s && a.busy == b.busy &&
         a.overhead == b.overhead && a.idle == b.idle && a.granted == b.granted &&
         a.blocked == b.blocked && a.forfeited == b.forfeited &&
         a.grants_issued == b.grants_issued && a.bursts == b.bursts;
}

}  // namespace

TEST_CASE("identical seeds reproduce bit-identical metrics") {
  const Scenario sc = small_tree();
  RunMetrics a = run_once(sc, 0.6, 0.5, 11);
  RunMetrics b = run_once(sc, 0.6, 0.5, 11);
  CHECK(metrics_equal(a, b));
  RunMetrics c = run_once(sc, 0.6, 0.5, 12);
  CHECK_FALSE(metrics_equal(a, c));
}

TEST_CASE("single tree never blocks and accounts every nanosecond") {
  const Scenario sc = small_tree();
  RunMetrics m = run_once(sc, 0.5, 1.0, 3);
  CHECK(m.blocked == 0);
  CHECK(m.grants_unserved == 0);
  CHECK(m.tx_peak_overlap == 1);
  // Grants run back to back; the only idle the destination sees is granted
  // time that found no data (flow endings and count staleness).
  CHECK(m.busy + m.overhead + m.idle == sc.horizon() - sc.warmup());
  CHECK(m.idle < (sc.horizon() - sc.warmup()) / 20);
  CHECK(m.overlap_checks > 0);
  CHECK(m.edge_checks > 0);
  CHECK(m.conservation_checks == m.bursts);
}

TEST_CASE("random clock offsets change nothing observable") {
  Scenario zero = small_tree();
  Scenario rand = small_tree();
  rand.clocks = Scenario::ClockModel::Random;
  RunMetrics a = run_once(zero, 0.5, 0.5, 9);
  RunMetrics b = run_once(rand, 0.5, 0.5, 9);
  // Offsets feed the same deterministic schedule: everything protocol-level
  // is unchanged because scheduling consumes only RTTs.
  CHECK(metrics_equal(a, b));
}

TEST_CASE("grant jitter within tau keeps every schedule feasible") {
  Scenario sc = small_tree();
  sc.jitter = Scenario::JitterModel::Uniform;
  RunMetrics m = run_once(sc, 0.5, 0.5, 21);
  CHECK(m.feasibility_checks > 0);
  CHECK(m.bursts > 0);
}

TEST_CASE("network with enough transmitters never blocks") {
  Scenario sc = small_network();
  sc.transmitters = sc.nodes;  // one per destination
  RunMetrics m = run_once(sc, 0.5, 1.0, 2);
  CHECK(m.blocked == 0);
  CHECK(m.grants_unserved == 0);
  CHECK(m.tx_peak_overlap <= sc.nodes);
}

TEST_CASE("single transmitter network blocks and conserves grant time") {
  Scenario sc = small_network();
  RunMetrics m = run_once(sc, 0.5, 1.0, 2);
  CHECK(m.blocked > 0);
  CHECK(m.tx_peak_overlap == 1);
  CHECK(m.grants_unserved > 0);
  // granted = served payload + forfeits + deficits, in-window edge effects
  // aside; all three buckets are exercised.
  CHECK(m.forfeited >= 0);
  CHECK(m.blocked < m.granted);
}

TEST_CASE("low load delay approaches the scheduling offset") {
  Scenario sc = small_tree(6.0);
  RunMetrics m = run_once(sc, 0.05, 0.0, 4);
  CHECK(m.nb_packets > 1000);
  CHECK(m.mean_nb_delay_ms() / m.delta_o_ms > 1.0);
  CHECK(m.mean_nb_delay_ms() / m.delta_o_ms < 1.3);
}

TEST_CASE("saturated all-backlogged gaps are exactly delta_r") {
  Scenario sc = small_tree(4.0);
  RunMetrics m = run_once(sc, 0.8, 1.0, 8);
  // The check itself is a hard invariant inside the engine; here we require
  // it actually fired on a meaningful share of bursts.
  CHECK(m.saturated_gap_checks > 1000);
}

TEST_CASE("explicit propagation delays and delta_o") {
  Scenario sc = small_tree(0.5);
  for (int s = 1; s <= sc.sources; ++s) {
    sc.delay_us[{0, s}] = 100.0 * s;
    sc.delay_us[{s, 0}] = 50.0 * s;
  }
  const auto delta_o = compute_delta_o(sc);
  REQUIRE(delta_o.size() == 1);
  CHECK(delta_o[0] == from_us(150.0 * sc.sources) + sc.tau());
  RunMetrics m = run_once(sc, 0.1, 1.0, 6);
  CHECK(m.delta_o_ms == doctest::Approx(to_ms(delta_o[0])));
}

TEST_CASE("replications aggregate with confidence intervals") {
  Scenario sc = small_tree(1.0);
  sc.replications = 4;
  SweepPoint pt = run_point(sc, 0.4, 0.5);
  CHECK(pt.runs.size() == 4);
  CHECK(pt.nb_delay_ms.n == 4);
  CHECK(pt.nb_delay_ms.ci95 > 0.0);
  // Same seed base reproduces the same aggregate.
  SweepPoint pt2 = run_point(sc, 0.4, 0.5);
  CHECK(pt.nb_delay_ms.mean == pt2.nb_delay_ms.mean);
}

TEST_CASE("confidence interval shrinks with replications") {
  Scenario sc = small_tree(1.0);
  sc.replications = 4;
  SweepPoint small = run_point(sc, 0.5, 1.0);
  sc.replications = 16;
  SweepPoint big = run_point(sc, 0.5, 1.0);
  REQUIRE(small.throughput_mbps.ci95 > 0.0);
  REQUIRE(big.throughput_mbps.ci95 > 0.0);
  const double ratio = small.throughput_mbps.ci95 / big.throughput_mbps.ci95;
  // ~1/sqrt(n) scaling with wide slack for the small-sample variance of s.
  CHECK(ratio > 1.2);
  CHECK(ratio < 8.0);
}

TEST_CASE("sweep results do not depend on the worker count") {
  Scenario sc = small_tree(1.0);
  sc.sweep_loads = {0.2, 0.6};
  sc.sweep_mixes = {0.0, 1.0};
  const auto serial = run_sweep(sc, 1);
  const auto parallel = run_sweep(sc, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].load == parallel[i].load);
    CHECK(serial[i].mix == parallel[i].mix);
    REQUIRE(serial[i].runs.size() == parallel[i].runs.size());
    CHECK(metrics_equal(serial[i].runs[0], parallel[i].runs[0]));
  }
}

TEST_CASE("mode guards") {
  Scenario sc = small_tree(0.5);
  CHECK_THROWS(run_network(sc, 1));
  Scenario net = small_network(0.5);
  CHECK_THROWS(run_single_tree(net, 1));
}

TEST_CASE("cycle time tracks S delta_r over one minus rho") {
  Scenario sc = small_tree(30.0);
  sc.sources = 10;
  sc.mean_flow_mb = 1.0;
  RunMetrics m = run_once(sc, 0.5, 1.0, 17);
  CHECK(m.mean_intervisit_us ==
        doctest::Approx(to_us(sc.delta_r()) * 10 / 0.5).epsilon(0.05));
}

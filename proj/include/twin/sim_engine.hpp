#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "twin/clock_sync.hpp"
#include "twin/event_queue.hpp"
#include "twin/grant_scheduler.hpp"
#include "twin/metrics.hpp"
#include "twin/rng.hpp"
#include "twin/scenario.hpp"
#include "twin/source_agent.hpp"
#include "twin/traffic_gen.hpp"

namespace twin {

// One deterministic discrete-event run: destinations formulate grants
// back-to-back per the recursion, sources arbitrate transmitter contention
// in grant arrival order, bursts carry data plus a trailing report. All
// protocol epochs are integer nanoseconds; schedule invariants are checked
// bit-exactly on every run and violations throw InvariantViolation.
class Engine {
 public:
  Engine(const Scenario& scenario, double load, double mix, std::uint64_t seed);
  RunMetrics run();

 private:
  enum class Ev : std::uint8_t {
    FlowArrive,
    NbPacket,
    Formulate,
    GrantDue,
    GrantExpire,
    TxFree,
    ReportEmit,
    FlowDoneTx,
  };

  struct Event {
    Ev kind;
    std::int16_t src = 0;  // physical source node
    std::int16_t tree = 0;
    std::int64_t a = 0, b = 0, c = 0, d = 0;
  };

  struct PendingGrant {
    TimeSpan d = 0;
    TimePoint start = 0;
    TimePoint data_end = 0;
    TimePoint arrival = 0;
    std::int64_t serial = 0;
    bool expiry_scheduled = false;
  };

  struct PendingReport {
    TimePoint deliver;
    std::uint64_t order;
    int slot;
    Report report;
    bool operator>(const PendingReport& o) const {
      return deliver > o.deliver || (deliver == o.deliver && order > o.order);
    }
  };

  // Outcome of one grant, resolved at serve or expiry time. Sources with
  // longer one-way delays start transmitting earlier relative to the
  // formulation epoch, so serve events interleave across sources; bursts
  // still arrive at the destination in grant order because each sits inside
  // its reserved window. The channel trace is therefore validated in grant
  // serial order.
  struct BurstTrace {
    bool served = false;
    TimePoint arrive_start = 0;
    TimePoint arrive_end = 0;
    TimeSpan d = 0;
    bool timely = false;
    bool full = false;
  };

  struct DestState {
    int node = 0;
    TimeSpan clock_offset = 0;
    GrantState gs;
    AllocationLedger ledger{1};
    Rng poll_rng{0};
    Rng jitter_rng{0};
    std::vector<int> src_node;  // slot -> physical node
    std::priority_queue<PendingReport, std::vector<PendingReport>,
                        std::greater<PendingReport>>
        report_fifo;
    std::uint64_t report_order = 0;

    std::int64_t next_trace_serial = 1;
    std::deque<std::optional<BurstTrace>> trace_buf;
    TimePoint prev_arrive_start = -1;
    TimePoint prev_arrive_end = -1;
    TimeSpan prev_d = 0;
    std::int64_t prev_serial = -1;
    bool prev_timely = false;
    bool prev_full = false;

    std::vector<TimePoint> last_visit;
    std::vector<std::int64_t> visit_gap_sum;
    std::vector<std::int64_t> visit_count;
  };

  struct PairState {
    DestinationQueue queue;
    std::optional<BackloggedFlowGen> flow_gen;
    std::optional<NbTrafficGen> nb_gen;
    std::int64_t live_flows = 0;
    TimePoint hist_mark = 0;
    std::int64_t flow_bytes_gen = 0;
    std::int64_t flow_bytes_sent = 0;
    std::int64_t nb_bytes_gen = 0;
    std::int64_t nb_bytes_sent = 0;
  };

  struct SrcState {
    LocalClockSet clocks{0, 2};
    TransmitterPool pool{1};
    // Service order: grant arrival time, ties by destination id. The serial
    // keeps keys unique when jitter makes two arrivals coincide.
    std::map<std::tuple<TimePoint, int, std::int64_t>, PendingGrant> due;
    std::vector<int> pair_index;    // tree -> index into pairs_, -1 if none
    std::vector<int> slot_in_tree;  // tree -> this node's source slot
  };

  // Setup.
  void build_topology();
  void bootstrap_clocks();
  void seed_traffic();

  // Event handlers.
  void on_flow_arrive(const Event& e, TimePoint now);
  void on_nb_packet(const Event& e, TimePoint now);
  void on_formulate(const Event& e, TimePoint now);
  void on_grant_due(const Event& e, TimePoint now);
  void on_grant_expire(const Event& e, TimePoint now);
  void on_tx_free(const Event& e, TimePoint now);
  void on_report_emit(const Event& e, TimePoint now);
  void on_flow_done_tx(const Event& e, TimePoint now);

  void try_serve(int src, TimePoint now);
  bool servable(const PendingGrant& g, TimePoint now, TimeSpan& guard) const;
  void serve(int src, int tree, const PendingGrant& g, TimePoint now);
  void expire(int src, int tree, const PendingGrant& g, TimePoint now);
  void emit_report(int src, int tree, TimePoint emit_t);
  void drain_reports(DestState& d, TimePoint now);
  void resolve_trace(DestState& d, std::int64_t serial, const BurstTrace& t);

  // Metrics helpers.
  TimeSpan clip(TimePoint a, TimePoint b) const;  // overlap with [warmup, horizon]
  bool in_window(TimePoint t) const { return t >= warmup_ && t <= horizon_; }
  void hist_update(PairState& p, TimePoint now, int delta);

  PairState& pair(int src, int tree);
  TimeSpan delay(int from_node, int to_node) const { return prop_->delay(from_node, to_node); }

  Scenario sc_;
  double load_;
  double mix_;
  std::uint64_t seed_;

  int n_trees_ = 1;
  int n_slots_ = 1;   // sources per tree
  int n_nodes_ = 2;   // physical nodes in the propagation matrix
  ChannelRate rate_;
  TimeSpan delta_r_ = 0;
  TimeSpan tau_ = 0;
  TimeSpan quantum_time_ = 0;
  TimeSpan max_grant_ = 0;
  TimeSpan retune_guard_ = 0;
  TimePoint warmup_ = 0;
  TimePoint horizon_ = 0;

  std::unique_ptr<PropagationMatrix> prop_;
  std::vector<DestState> dests_;
  std::vector<SrcState> srcs_;   // indexed by physical node
  std::vector<PairState> pairs_;
  EventQueue<Event> queue_;

  RunMetrics m_;
  std::uint64_t next_id_ = 1;
  std::int64_t credit_emitted_ = 0;
  std::int64_t credit_delivered_ = 0;
};

// Per-tree scheduling offsets (max source RTT + tau) under the scenario's
// seeded propagation matrix; equals what a run's bootstrap exchange measures.
std::vector<TimeSpan> compute_delta_o(const Scenario& sc);

// Entry points. run_single_tree / run_network validate the scenario mode;
// both run every (load, mix, seed) combination of the sweep.
RunMetrics run_once(const Scenario& sc, double load, double mix, std::uint64_t seed);
SweepPoint run_point(const Scenario& sc, double load, double mix);
std::vector<SweepPoint> run_sweep(const Scenario& sc, int jobs);
std::vector<SweepPoint> run_single_tree(const Scenario& sc, int jobs);
std::vector<SweepPoint> run_network(const Scenario& sc, int jobs);

}  // namespace twin

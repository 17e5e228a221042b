#include "twin/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "twin/error.hpp"

namespace twin {
namespace {

std::uint64_t stream_seed(std::uint64_t seed, int kind, int a, int b) {
  return Rng::mix(Rng::mix(seed, static_cast<std::uint64_t>(kind) << 32),
                  (static_cast<std::uint64_t>(a) << 20) ^ static_cast<std::uint64_t>(b));
}

}  // namespace

Engine::Engine(const Scenario& scenario, double load, double mix, std::uint64_t seed)
    : sc_(scenario), load_(load), mix_(mix), seed_(seed) {
  sc_.validate();
  if (load_ < 0) throw SimError("negative load");
  if (mix_ < 0 || mix_ > 1) throw SimError("mix outside [0,1]");
  n_trees_ = sc_.tree_count();
  n_slots_ = sc_.sources_per_tree();
  // Physical node ids: destinations first, then source nodes.
  n_nodes_ = sc_.mode == Scenario::Mode::Network ? 2 * sc_.nodes : sc_.sources + 1;
  rate_.bits_per_s = static_cast<std::int64_t>(sc_.capacity_bps());
  delta_r_ = sc_.delta_r();
  tau_ = sc_.tau();
  quantum_time_ = rate_.bytes_time(sc_.quantum_bytes);
  max_grant_ = sc_.max_grant_us > 0 ? from_us(sc_.max_grant_us) : 0;
  retune_guard_ = from_us(sc_.retune_guard_us);
  warmup_ = sc_.warmup();
  horizon_ = sc_.horizon();
  m_.load = load_;
  m_.mix = mix_;
  m_.seed = seed_;
}

TimeSpan Engine::clip(TimePoint a, TimePoint b) const {
  const TimePoint lo = std::max(a, warmup_);
  const TimePoint hi = std::min(b, horizon_);
  return hi > lo ? hi - lo : 0;
}

Engine::PairState& Engine::pair(int src, int tree) {
  const int idx = srcs_[src].pair_index[tree];
  TWIN_CHECK(idx >= 0, "no traffic pair for this source/tree");
  return pairs_[static_cast<std::size_t>(idx)];
}

void Engine::hist_update(PairState& p, TimePoint now, int delta) {
  const TimeSpan w = clip(p.hist_mark, now);
  if (w > 0) {
    if (m_.flow_count_weight.size() <= static_cast<std::size_t>(p.live_flows))
      m_.flow_count_weight.resize(p.live_flows + 1, 0.0);
    m_.flow_count_weight[static_cast<std::size_t>(p.live_flows)] += static_cast<double>(w);
  }
  p.hist_mark = std::max(p.hist_mark, now);
  p.live_flows += delta;
  TWIN_CHECK(p.live_flows >= 0, "negative live flow count");
  m_.flow_count_watermark = std::max(m_.flow_count_watermark, p.live_flows);
}

void Engine::build_topology() {
  Rng topo_rng(stream_seed(seed_, 1, 0, 0));
  prop_ = std::make_unique<PropagationMatrix>(PropagationMatrix::generate(
      n_nodes_, from_ms(sc_.rtt_min_ms), from_ms(sc_.rtt_max_ms), topo_rng));
  for (const auto& [pair_key, us] : sc_.delay_us)
    prop_->set_delay(pair_key.first, pair_key.second, from_us(us));

  Rng clock_rng(stream_seed(seed_, 2, 0, 0));
  std::vector<TimeSpan> dest_offset(n_nodes_, 0);
  if (sc_.clocks == Scenario::ClockModel::Random)
    for (auto& o : dest_offset)
      o = static_cast<TimeSpan>(clock_rng.below(2 * kSecond)) - kSecond;

  srcs_.clear();
  srcs_.resize(n_nodes_);
  for (int n = 0; n < n_nodes_; ++n) {
    srcs_[n].clocks = LocalClockSet(n, n_nodes_, dest_offset[n]);
    srcs_[n].pool = TransmitterPool(sc_.transmitters);
    srcs_[n].pair_index.assign(n_trees_, -1);
    srcs_[n].slot_in_tree.assign(n_trees_, -1);
  }

  dests_.clear();
  dests_.resize(n_trees_);
  for (int j = 0; j < n_trees_; ++j) {
    DestState& d = dests_[j];
    d.node = sc_.mode == Scenario::Mode::Network ? j : 0;
    d.clock_offset = dest_offset[d.node];
    d.src_node.clear();
    for (int slot = 0; slot < n_slots_; ++slot)
      d.src_node.push_back(sc_.mode == Scenario::Mode::Network ? sc_.nodes + slot
                                                               : 1 + slot);
    TWIN_CHECK(static_cast<int>(d.src_node.size()) == n_slots_, "slot count mismatch");
    d.ledger = AllocationLedger(n_slots_);
    d.poll_rng = Rng(stream_seed(seed_, 3, j, 0));
    d.jitter_rng = Rng(stream_seed(seed_, 4, j, 0));
    d.last_visit.assign(n_slots_, -1);
    d.visit_gap_sum.assign(n_slots_, 0);
    d.visit_count.assign(n_slots_, 0);
  }

  pairs_.clear();
  const double pair_backlogged = load_ * mix_ / n_slots_;
  const double pair_nonbacklogged = load_ * (1.0 - mix_) / n_slots_;
  BackloggedFlowGen::SizeDist dist = BackloggedFlowGen::SizeDist::Exponential;
  if (sc_.size_dist == "deterministic")
    dist = BackloggedFlowGen::SizeDist::Deterministic;
  else if (sc_.size_dist == "hyperexponential")
    dist = BackloggedFlowGen::SizeDist::Hyperexponential;
  for (int j = 0; j < n_trees_; ++j) {
    for (int slot = 0; slot < n_slots_; ++slot) {
      const int n = dests_[j].src_node[slot];
      TrafficMixEntry mix_entry;
      mix_entry.backlogged_load = pair_backlogged;
      mix_entry.nonbacklogged_load = pair_nonbacklogged;
      mix_entry.mean_flow_bytes = sc_.mean_flow_mb * 1e6;
      mix_entry.nb_flow_rate_bps = sc_.nb_rate_mbps * 1e6;
      mix_entry.nb_flow_duration_s = sc_.nb_duration_s;
      mix_entry.packet_bytes = sc_.packet_bytes;
      pairs_.push_back(PairState{});
      PairState& p = pairs_.back();
      srcs_[n].pair_index[j] = static_cast<int>(pairs_.size()) - 1;
      srcs_[n].slot_in_tree[j] = slot;
      if (pair_backlogged > 0)
        p.flow_gen.emplace(mix_entry, sc_.capacity_bps(), stream_seed(seed_, 5, n, j), dist);
      if (pair_nonbacklogged > 0)
        p.nb_gen.emplace(mix_entry, sc_.capacity_bps(), stream_seed(seed_, 6, n, j));
    }
  }
}

void Engine::bootstrap_clocks() {
  // Startup timestamp exchange per (destination, source) pair: the
  // destination stamps t1 at global time 0, the source replies immediately
  // on receipt, and the measured t3 - t2 equals the pair's RTT exactly.
  TimeSpan max_rtt_any = 0;
  for (int j = 0; j < n_trees_; ++j) {
    DestState& d = dests_[j];
    std::vector<TimeSpan> rtt(n_slots_, 0);
    for (int slot = 0; slot < n_slots_; ++slot) {
      const int n = d.src_node[slot];
      const TimePoint t1 = 0 + d.clock_offset;
      const TimePoint fwd_arrival = delay(d.node, n);
      srcs_[n].clocks.apply_timestamp(d.node, t1, fwd_arrival);
      const TimePoint t2 = srcs_[n].clocks.source_now(d.node, fwd_arrival);
      const TimePoint back_arrival = fwd_arrival + delay(n, d.node);
      const TimePoint t3 = back_arrival + d.clock_offset;
      rtt[slot] = measure_rtt(t2, t3);
      TWIN_CHECK(rtt[slot] == prop_->rtt(n, d.node), "measured RTT != propagation RTT");
      max_rtt_any = std::max(max_rtt_any, rtt[slot]);
    }
    d.gs.dest = j;
    d.gs.delta_r = delta_r_;
    d.gs.tau = tau_;
    d.gs.rtt = std::move(rtt);
    d.gs.delta_o = GrantState::minimal_offset(d.gs.rtt, tau_);
  }
  // Destinations boot independently: grant loops start once every reply is
  // in, staggered within one idle polling round.
  for (int j = 0; j < n_trees_; ++j) {
    DestState& d = dests_[j];
    const TimeSpan stagger = static_cast<TimeSpan>(d.jitter_rng.below(
        static_cast<std::uint64_t>(n_slots_) * static_cast<std::uint64_t>(delta_r_)));
    const TimePoint t0 = max_rtt_any + kMicro + stagger;
    d.gs.g = t0 + d.clock_offset - delta_r_;
    d.gs.d_last = 0;
    queue_.push(t0, Event{Ev::Formulate, 0, static_cast<std::int16_t>(j)});
  }
}

void Engine::seed_traffic() {
  for (int j = 0; j < n_trees_; ++j) {
    for (int slot = 0; slot < n_slots_; ++slot) {
      const int n = dests_[j].src_node[slot];
      PairState& p = pair(n, j);
      if (p.flow_gen) {
        const auto first = p.flow_gen->next();
        if (first.at <= horizon_)
          queue_.push(first.at, Event{Ev::FlowArrive, static_cast<std::int16_t>(n),
                                      static_cast<std::int16_t>(j), first.bytes});
      }
      if (p.nb_gen) {
        const auto first = p.nb_gen->next();
        if (first.at <= horizon_)
          queue_.push(first.at, Event{Ev::NbPacket, static_cast<std::int16_t>(n),
                                      static_cast<std::int16_t>(j), first.bytes});
      }
    }
  }
}

void Engine::on_flow_arrive(const Event& e, TimePoint now) {
  PairState& p = pair(e.src, e.tree);
  hist_update(p, now, +1);
  p.queue.add_flow(next_id_++, now, e.a);
  p.flow_bytes_gen += e.a;
  if (in_window(now)) m_.offered_backlogged_bits += static_cast<double>(e.a) * 8.0;
  const auto next = p.flow_gen->next();
  if (next.at <= horizon_)
    queue_.push(next.at, Event{Ev::FlowArrive, e.src, e.tree, next.bytes});
}

void Engine::on_nb_packet(const Event& e, TimePoint now) {
  PairState& p = pair(e.src, e.tree);
  p.queue.add_packet(next_id_++, now, e.a, rate_);
  p.nb_bytes_gen += e.a;
  if (in_window(now)) m_.offered_nb_bits += static_cast<double>(e.a) * 8.0;
  const auto next = p.nb_gen->next();
  if (next.at <= horizon_)
    queue_.push(next.at, Event{Ev::NbPacket, e.src, e.tree, next.bytes});
}

void Engine::drain_reports(DestState& d, TimePoint now) {
  while (!d.report_fifo.empty() && d.report_fifo.top().deliver <= now) {
    const PendingReport& r = d.report_fifo.top();
    d.ledger.credit(r.slot, r.report);
    credit_delivered_ += r.report.time_credit;
    d.report_fifo.pop();
  }
}

// Channel trace in grant order: every resolved grant (burst served, or
// expired with no burst) advances the cursor; consecutive served bursts are
// checked for overlap and for the exact d(n) + delta_r edge spacing.
void Engine::resolve_trace(DestState& d, std::int64_t serial, const BurstTrace& t) {
  const std::size_t off = static_cast<std::size_t>(serial - d.next_trace_serial);
  if (d.trace_buf.size() <= off) d.trace_buf.resize(off + 1);
  TWIN_CHECK(!d.trace_buf[off].has_value(), "grant resolved twice");
  d.trace_buf[off] = t;
  while (!d.trace_buf.empty() && d.trace_buf.front().has_value()) {
    const BurstTrace cur = *d.trace_buf.front();
    d.trace_buf.pop_front();
    const std::int64_t cur_serial = d.next_trace_serial++;
    if (!cur.served) continue;
    TWIN_CHECK(cur.arrive_start >= d.prev_arrive_end, "burst overlap at destination");
    m_.overlap_checks += 1;
    if (d.prev_serial + 1 == cur_serial && d.prev_timely && cur.timely) {
      TWIN_CHECK(cur.arrive_start - d.prev_arrive_start == d.prev_d + delta_r_,
                 "burst leading edges not separated by d + delta_r");
      m_.edge_checks += 1;
      if (d.prev_full) {
        TWIN_CHECK(cur.arrive_start == d.prev_arrive_end,
                   "saturated inter-burst gap differs from delta_r");
        m_.saturated_gap_checks += 1;
      }
    }
    d.prev_arrive_start = cur.arrive_start;
    d.prev_arrive_end = cur.arrive_end;
    d.prev_d = cur.d;
    d.prev_serial = cur_serial;
    d.prev_timely = cur.timely;
    d.prev_full = cur.full;
  }
}

void Engine::on_formulate(const Event& e, TimePoint now) {
  DestState& d = dests_[e.tree];
  drain_reports(d, now);

  const int slot = next_source(d.gs.last_source, n_slots_, d.poll_rng);
  const TimeSpan dur = d.ledger.drain(slot, quantum_time_, max_grant_);
  const auto epochs = d.gs.advance(slot, dur);
  TWIN_CHECK(epochs.g_next == now + d.clock_offset, "formulation off schedule");

  if (d.last_visit[slot] >= warmup_ && now <= horizon_) {
    d.visit_gap_sum[slot] += now - d.last_visit[slot];
    d.visit_count[slot] += 1;
  }
  d.last_visit[slot] = now;

  const int src = d.src_node[slot];
  const TimeSpan u =
      sc_.jitter == Scenario::JitterModel::Uniform
          ? static_cast<TimeSpan>(d.jitter_rng.below(static_cast<std::uint64_t>(tau_) + 1))
          : 0;
  const TimePoint arrival = grant_delivery_time(now, delay(d.node, src), u);
  const TimePoint start = srcs_[src].clocks.source_to_global(d.node, epochs.s_next);
  TWIN_CHECK(arrival <= start, "grant arrived after its start time");
  m_.feasibility_checks += 1;

  if (in_window(now)) {
    m_.granted += dur;
    m_.grants_issued += 1;
  }
  queue_.push(std::max(start, arrival),
              Event{Ev::GrantDue, static_cast<std::int16_t>(src), e.tree, dur, start,
                    arrival, static_cast<std::int64_t>(d.gs.grants_issued)});

  const TimePoint next_g = now + dur + delta_r_;
  if (next_g <= horizon_) queue_.push(next_g, Event{Ev::Formulate, 0, e.tree});
}

bool Engine::servable(const PendingGrant& g, TimePoint now, TimeSpan& guard) const {
  guard = (now > g.start && retune_guard_ > 0) ? retune_guard_ : 0;
  return now + guard <= g.data_end;
}

void Engine::on_grant_due(const Event& e, TimePoint now) {
  SrcState& s = srcs_[e.src];
  PendingGrant g;
  g.d = e.a;
  g.start = e.b;
  g.data_end = e.b + e.a;
  g.arrival = e.c;
  g.serial = e.d;
  TimeSpan guard = 0;
  if (s.pool.has_idle() && s.due.empty() && servable(g, now, guard)) {
    serve(e.src, e.tree, g, now);
    return;
  }
  const auto key = std::make_tuple(g.arrival, static_cast<int>(e.tree), g.serial);
  s.due.emplace(key, g);
  try_serve(e.src, now);
  auto it = s.due.find(key);
  if (it != s.due.end() && !it->second.expiry_scheduled) {
    it->second.expiry_scheduled = true;
    queue_.push(g.data_end + 1,
                Event{Ev::GrantExpire, e.src, e.tree, 0, 0, g.arrival, g.serial});
  }
}

void Engine::on_grant_expire(const Event& e, TimePoint now) {
  SrcState& s = srcs_[e.src];
  auto it = s.due.find(
      std::make_tuple(static_cast<TimePoint>(e.c), static_cast<int>(e.tree), e.d));
  if (it == s.due.end()) return;  // already served or lazily expired
  TimeSpan guard = 0;
  TWIN_CHECK(!servable(it->second, now, guard), "expiry fired on a servable grant");
  expire(e.src, e.tree, it->second, now);
  s.due.erase(it);
}

void Engine::on_tx_free(const Event& e, TimePoint now) {
  srcs_[e.src].pool.release();
  try_serve(e.src, now);
}

void Engine::try_serve(int src, TimePoint now) {
  SrcState& s = srcs_[src];
  // Every map entry is already due: grants enter at max(start, arrival).
  while (s.pool.has_idle() && !s.due.empty()) {
    auto it = s.due.begin();
    const int tree = std::get<1>(it->first);
    PendingGrant g = it->second;
    TWIN_CHECK(g.start <= now, "pending grant not yet due");
    TimeSpan guard = 0;
    if (!servable(g, now, guard)) {
      expire(src, tree, g, now);
      s.due.erase(it);
      continue;
    }
    s.due.erase(it);
    serve(src, tree, g, now);
  }
}

void Engine::expire(int src, int tree, const PendingGrant& g, TimePoint now) {
  PairState& p = pair(src, tree);
  record_deficit(p.queue, g.d, 0);
  if (in_window(now)) {
    m_.blocked += g.d;
    m_.grants_unserved += 1;
  }
  m_.conservation_checks += 1;  // served 0 + deficit d + forfeit 0 == d
  resolve_trace(dests_[tree], g.serial, BurstTrace{});
}

void Engine::serve(int src, int tree, const PendingGrant& g, TimePoint now) {
  SrcState& s = srcs_[src];
  DestState& d = dests_[tree];
  PairState& p = pair(src, tree);
  s.pool.acquire();

  const TimeSpan guard = (now > g.start && retune_guard_ > 0) ? retune_guard_ : 0;
  const TimePoint tx_start = now + guard;
  const TimeSpan usable = g.data_end - tx_start;
  TWIN_CHECK(usable >= 0, "service started beyond the data window");
  const TimeSpan lost = g.d - usable;
  if (lost > 0) {
    record_deficit(p.queue, g.d, usable);
    if (in_window(now)) m_.blocked += lost;
  }

  Burst burst = build_burst(p.queue, usable, sc_.quantum_bytes, rate_);
  TWIN_CHECK(lost + burst.payload_time + burst.forfeit_time == g.d,
             "grant time not conserved");
  m_.conservation_checks += 1;
  if (in_window(now)) m_.forfeited += burst.forfeit_time;

  const TimeSpan dij = delay(src, d.node);
  const TimePoint arrive_start = tx_start + dij;
  const TimePoint arrive_end = tx_start + burst.payload_time + delta_r_ + dij;
  const bool timely = now == g.start && guard == 0;
  const bool full = burst.payload_time == g.d;
  resolve_trace(d, g.serial,
                BurstTrace{true, arrive_start, arrive_end, g.d, timely, full});

  m_.busy += clip(arrive_start, arrive_start + burst.payload_time);
  m_.overhead += clip(arrive_start + burst.payload_time, arrive_end);
  m_.bursts += 1;

  // Fragment timings are fully determined now; record delivery metrics and
  // schedule the transmit-completion points that change queue-level state.
  TimeSpan cum = 0;
  for (const auto& item : burst.items) {
    cum += rate_.bytes_time(item.bytes);
    const TimePoint frag_done = tx_start + cum;
    const TimePoint deliver = frag_done + dij;
    if (item.kind == BurstItem::Kind::NbFragment) {
      p.nb_bytes_sent += item.bytes;
      if (item.completes && item.origin_arrival >= warmup_ && deliver <= horizon_) {
        m_.nb_packets += 1;
        m_.nb_delay_sum_ms += to_ms(deliver - item.origin_arrival);
      }
    } else {
      p.flow_bytes_sent += item.bytes;
      if (item.completes) {
        if (frag_done <= horizon_)
          queue_.push(frag_done, Event{Ev::FlowDoneTx, static_cast<std::int16_t>(src),
                                       static_cast<std::int16_t>(tree)});
        if (item.origin_arrival >= warmup_ && deliver <= horizon_) {
          const std::int64_t size = item.offset + item.bytes;
          const double resp_s = to_s(deliver - item.origin_arrival);
          m_.flows_completed += 1;
          m_.flow_bits_sum += static_cast<double>(size) * 8.0;
          m_.response_sum_s += resp_s;
          m_.per_flow_rate_sum_mbps += static_cast<double>(size) * 8.0 / resp_s / 1e6;
        }
      }
    }
  }

  if (burst.payload_time == 0)
    emit_report(src, tree, tx_start);
  else
    queue_.push(tx_start + burst.payload_time,
                Event{Ev::ReportEmit, static_cast<std::int16_t>(src),
                      static_cast<std::int16_t>(tree)});
  queue_.push(tx_start + burst.payload_time + delta_r_,
              Event{Ev::TxFree, static_cast<std::int16_t>(src), 0});
}

void Engine::on_report_emit(const Event& e, TimePoint now) {
  emit_report(e.src, e.tree, now);
}

void Engine::emit_report(int src, int tree, TimePoint emit_t) {
  DestState& d = dests_[tree];
  PairState& p = pair(src, tree);
  Report rep = build_report(p.queue);
  credit_emitted_ += rep.time_credit;
  const int slot = srcs_[src].slot_in_tree[tree];
  TWIN_CHECK(slot >= 0, "report from a node outside this tree");
  d.report_fifo.push(
      PendingReport{emit_t + delta_r_ + delay(src, d.node), d.report_order++, slot, rep});
}

void Engine::on_flow_done_tx(const Event& e, TimePoint now) {
  hist_update(pair(e.src, e.tree), now, -1);
}

RunMetrics Engine::run() {
  build_topology();
  bootstrap_clocks();
  seed_traffic();

  while (!queue_.empty()) {
    if (queue_.top().t > horizon_) break;
    auto entry = queue_.pop();
    const TimePoint now = entry.t;
    const Event& e = entry.payload;
    switch (e.kind) {
      case Ev::FlowArrive: on_flow_arrive(e, now); break;
      case Ev::NbPacket: on_nb_packet(e, now); break;
      case Ev::Formulate: on_formulate(e, now); break;
      case Ev::GrantDue: on_grant_due(e, now); break;
      case Ev::GrantExpire: on_grant_expire(e, now); break;
      case Ev::TxFree: on_tx_free(e, now); break;
      case Ev::ReportEmit: on_report_emit(e, now); break;
      case Ev::FlowDoneTx: on_flow_done_tx(e, now); break;
    }
  }

  // Finalize time-weighted histograms and run the conservation audits.
  for (auto& p : pairs_) hist_update(p, horizon_, 0);

  for (auto& p : pairs_) {
    std::int64_t flow_left = 0;
    for (const auto& f : p.queue.ring) flow_left += f.remaining;
    TWIN_CHECK(p.flow_bytes_gen == p.flow_bytes_sent + flow_left,
               "backlogged byte conservation failed");
    std::int64_t nb_left = 0;
    for (const auto& pkt : p.queue.nb) nb_left += pkt.bytes - pkt.sent;
    TWIN_CHECK(p.nb_bytes_gen == p.nb_bytes_sent + nb_left,
               "non-backlogged byte conservation failed");
  }

  std::int64_t credit_in_flight = 0;
  for (auto& d : dests_) {
    auto fifo = d.report_fifo;
    while (!fifo.empty()) {
      credit_in_flight += fifo.top().report.time_credit;
      fifo.pop();
    }
  }
  TWIN_CHECK(credit_emitted_ == credit_delivered_ + credit_in_flight,
             "reported credit conservation failed");

  const TimeSpan window = horizon_ - warmup_;
  m_.idle = static_cast<TimeSpan>(n_trees_) * window - m_.busy - m_.overhead;
  TWIN_CHECK(m_.idle >= 0, "channel accounting exceeds elapsed time");

  std::int64_t gap_sum = 0, gap_count = 0;
  double delta_o_sum = 0.0, delta_o_max = 0.0;
  for (const auto& d : dests_) {
    for (int s = 0; s < n_slots_; ++s) {
      gap_sum += d.visit_gap_sum[s];
      gap_count += d.visit_count[s];
    }
    delta_o_sum += to_ms(d.gs.delta_o);
    delta_o_max = std::max(delta_o_max, to_ms(d.gs.delta_o));
  }
  m_.mean_intervisit_us = gap_count ? to_us(gap_sum) / static_cast<double>(gap_count) : 0.0;
  m_.delta_o_ms = delta_o_sum / n_trees_;
  m_.max_delta_o_ms = delta_o_max;

  for (const auto& s : srcs_) m_.tx_peak_overlap = std::max(m_.tx_peak_overlap, s.pool.peak());

  bool nb_active = false;
  for (const auto& p : pairs_)
    if (p.nb_gen) nb_active = true;
  m_.low_confidence = nb_active && m_.nb_packets < 10000;
  return m_;
}

std::vector<TimeSpan> compute_delta_o(const Scenario& sc) {
  sc.validate();
  const int n_nodes = sc.mode == Scenario::Mode::Network ? 2 * sc.nodes : sc.sources + 1;
  Rng topo_rng(stream_seed(sc.seed, 1, 0, 0));
  PropagationMatrix prop = PropagationMatrix::generate(
      n_nodes, from_ms(sc.rtt_min_ms), from_ms(sc.rtt_max_ms), topo_rng);
  for (const auto& [pair_key, us] : sc.delay_us)
    prop.set_delay(pair_key.first, pair_key.second, from_us(us));
  std::vector<TimeSpan> out;
  for (int j = 0; j < sc.tree_count(); ++j) {
    const int dest = sc.mode == Scenario::Mode::Network ? j : 0;
    TimeSpan max_rtt = 0;
    for (int slot = 0; slot < sc.sources_per_tree(); ++slot) {
      const int n = sc.mode == Scenario::Mode::Network ? sc.nodes + slot : 1 + slot;
      max_rtt = std::max(max_rtt, prop.rtt(n, dest));
    }
    out.push_back(max_rtt + sc.tau());
  }
  return out;
}

RunMetrics run_once(const Scenario& sc, double load, double mix, std::uint64_t seed) {
  Engine engine(sc, load, mix, seed);
  return engine.run();
}

SweepPoint run_point(const Scenario& sc, double load, double mix) {
  SweepPoint pt;
  pt.load = load;
  pt.mix = mix;
  std::vector<double> delays, thrpts, blocked, visits;
  for (int r = 0; r < sc.replications; ++r) {
    RunMetrics m = run_once(sc, load, mix, sc.seed + static_cast<std::uint64_t>(r));
    delays.push_back(m.mean_nb_delay_ms());
    thrpts.push_back(m.mean_throughput_mbps());
    blocked.push_back(m.blocked_fraction());
    visits.push_back(m.mean_intervisit_us);
    pt.runs.push_back(std::move(m));
  }
  pt.nb_delay_ms = estimate(delays);
  pt.throughput_mbps = estimate(thrpts);
  pt.blocked_fraction = estimate(blocked);
  pt.intervisit_us = estimate(visits);
  return pt;
}

std::vector<SweepPoint> run_sweep(const Scenario& sc, int jobs) {
  std::vector<double> loads = sc.sweep_loads.empty() ? std::vector<double>{sc.load}
                                                     : sc.sweep_loads;
  std::vector<double> mixes = sc.sweep_mixes.empty()
                                  ? std::vector<double>{sc.backlogged_fraction}
                                  : sc.sweep_mixes;
  struct Task {
    double load, mix;
  };
  std::vector<Task> tasks;
  for (double mix : mixes)
    for (double load : loads) tasks.push_back(Task{load, mix});

  std::vector<SweepPoint> out(tasks.size());
  if (jobs < 1) jobs = 1;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex fail_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        out[i] = run_point(sc, tasks[i].load, tasks[i].mix);
      } catch (...) {
        std::lock_guard<std::mutex> lk(fail_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (jobs == 1 || tasks.size() == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<SweepPoint> run_single_tree(const Scenario& sc, int jobs) {
  if (sc.mode != Scenario::Mode::SingleTree)
    throw SimError("scenario mode must be single-tree");
  return run_sweep(sc, jobs);
}

std::vector<SweepPoint> run_network(const Scenario& sc, int jobs) {
  if (sc.mode != Scenario::Mode::Network) throw SimError("scenario mode must be network");
  return run_sweep(sc, jobs);
}

}  // namespace twin

// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Tolerances are pinned in code next to each check. Scenario seeds are fixed
// so every run of this binary is reproducible.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "twin/analytics.hpp"
#include "twin/experiment.hpp"
#include "twin/polling_oracle.hpp"
#include "twin/sim_engine.hpp"

using namespace twin;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

double run_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Blocking limits: B1 -> 1/e, B2 -> 3/e - 1, B3 -> 11/(2e) - 2 at rho' = 1,
//    exact to 1e-9 in the large-network limit, matching the quoted rounded
//    values, in under a second.
void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double b1 = analytics::blocking_fraction(1, 2, 1.0, true);
  const double b2 = analytics::blocking_fraction(2, 2, 1.0, true);
  const double b3 = analytics::blocking_fraction(3, 2, 1.0, true);
  const double e1 = std::exp(-1.0);
  bool pass = std::fabs(b1 - e1) <= 1e-9;
  pass = pass && std::fabs(b2 - (3.0 * e1 - 1.0)) <= 1e-9;
  pass = pass && std::fabs(b3 - (5.5 * e1 - 2.0)) <= 1e-9;
  pass = pass && fmt(b1, 2) == "0.37" && fmt(b2, 2) == "0.10" && fmt(b3, 2) == "0.02";
  // Finite networks approach the limit from below; at R = 1e6 the binomial
  // evaluation agrees with the Poisson limit to O(1/R).
  const double b1_big = analytics::blocking_fraction(1, 1'000'000, 1.0);
  pass = pass && std::fabs(b1_big - e1) <= 1e-5;
  const double secs = run_seconds(t0);
  pass = pass && secs < 1.0;
  report(1, pass,
         "B1=" + fmt(b1, 6) + " B2=" + fmt(b2, 6) + " B3=" + fmt(b3, 6) +
             " (limits 0.367879/0.103638/0.023337), R=1e6 B1=" + fmt(b1_big, 6) +
             ", runtime " + fmt(secs, 3) + "s");
}

// ---------------------------------------------------------------------------
// 2. Network capacity knee: 10x10, one transmitter, all non-backlogged.
//    Mean packet delay < 5 delta_o at rho = 0.55 and > 50 delta_o at 0.70,
//    bracketing the analytic maximum load.
void criterion2() {
  Scenario sc;
  sc.mode = Scenario::Mode::Network;
  sc.nodes = 10;
  sc.transmitters = 1;
  sc.seed = 1;

  sc.horizon_s = 12;
  RunMetrics low = run_once(sc, 0.55, 0.0, 1);
  sc.horizon_s = 6;
  RunMetrics high = run_once(sc, 0.70, 0.0, 1);
  const auto ml = analytics::max_load(1, sc.nodes + 1);

  const double r_low = low.mean_nb_delay_ms() / low.delta_o_ms;
  const double r_high = high.mean_nb_delay_ms() / high.delta_o_ms;
  const bool pass =
      r_low < 5.0 && r_high > 50.0 && 0.55 < ml.rho_star && ml.rho_star < 0.70;
  report(2, pass,
         "delay/delta_o = " + fmt(r_low, 2) + " at rho 0.55 (< 5) and " + fmt(r_high, 1) +
             " at rho 0.70 (> 50), bracketing rho* = " + fmt(ml.rho_star, 4));
}

// ---------------------------------------------------------------------------
// 3. Throughput law: single tree, mixes 20/60/100% backlogged, loads 0.1-0.9,
//    1 KB quantum. Measured flow throughput within 10% of the reduced-system
//    (1-rho) C / (1+x), and the mix curves collapse onto each other within
//    10% at equal effective load.
void criterion3() {
  Scenario sc;
  sc.mode = Scenario::Mode::SingleTree;
  sc.sources = 10;
  sc.mean_flow_mb = 2.0;  // insensitivity: smaller flows mix faster
  sc.seed = 1;

  const std::vector<double> mixes{0.2, 0.6, 1.0};
  const std::vector<double> loads{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const double x = sc.overhead_ratio_x();

  bool pass = true;
  double worst = 0.0;
  std::string worst_at = "-";
  struct CurvePoint {
    double rho_eff;
    double normalized;  // gamma (1+x) / C_eff
  };
  std::vector<std::vector<CurvePoint>> curves(mixes.size());

  for (std::size_t mi = 0; mi < mixes.size(); ++mi) {
    for (double load : loads) {
      sc.horizon_s = load <= 0.5 ? 120 : (load <= 0.7 ? 250 : (load <= 0.8 ? 400 : 600));
      RunMetrics m = run_once(sc, load, mixes[mi], sc.seed);
      analytics::Params p = analytics::Params::symmetric(10, load, x);
      p.rho_nonbacklogged = load * (1.0 - mixes[mi]);
      const double target = analytics::flow_throughput_bps(p) / 1e6;
      const double err = std::fabs(m.mean_throughput_mbps() / target - 1.0);
      if (err > worst) {
        worst = err;
        worst_at = "load " + fmt(load, 1) + " mix " + fmt(mixes[mi], 1);
      }
      if (err > 0.10) pass = false;
      const analytics::Params r = p.reduced();
      curves[mi].push_back(
          CurvePoint{r.rho, m.mean_throughput_mbps() * 1e6 * (1.0 + x) / r.capacity_bps});
    }
  }

  // Pairwise collapse at equal effective load via linear interpolation.
  auto interp = [](const std::vector<CurvePoint>& c, double rho) -> double {
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i - 1].rho_eff <= rho && rho <= c[i].rho_eff) {
        const double w = (rho - c[i - 1].rho_eff) / (c[i].rho_eff - c[i - 1].rho_eff);
        return c[i - 1].normalized * (1 - w) + c[i].normalized * w;
      }
    }
    return -1.0;
  };
  double worst_pair = 0.0;
  for (double rho = 0.15; rho <= 0.65; rho += 0.1) {
    std::vector<double> vals;
    for (const auto& c : curves) {
      const double v = interp(c, rho);
      if (v > 0) vals.push_back(v);
    }
    for (std::size_t a = 0; a < vals.size(); ++a)
      for (std::size_t b = a + 1; b < vals.size(); ++b) {
        const double ratio = vals[a] > vals[b] ? vals[a] / vals[b] : vals[b] / vals[a];
        worst_pair = std::max(worst_pair, ratio - 1.0);
      }
  }
  if (worst_pair > 0.10) pass = false;

  report(3, pass,
         "worst throughput error " + fmt(100 * worst, 1) + "% at " + worst_at +
             " (<= 10%), worst mix spread at equal effective load " +
             fmt(100 * worst_pair, 1) + "% (<= 10%)");
}

// ---------------------------------------------------------------------------
// 4. Zero-load intercepts: with a 10 KB quantum the measured throughput at
//    rho = 0.05 stays above 0.9 x 800 Mb/s; packet delay at rho = 0.05 lands
//    within 20% of delta_o.
void criterion4() {
  Scenario sc;
  sc.mode = Scenario::Mode::SingleTree;
  sc.sources = 10;
  sc.quantum_bytes = 10000;
  sc.mean_flow_mb = 10.0;
  sc.horizon_s = 250;
  sc.seed = 1;
  double gamma_sum = 0.0;
  for (std::uint64_t s = 1; s <= 2; ++s)
    gamma_sum += run_once(sc, 0.05, 1.0, s).mean_throughput_mbps();
  const double gamma = gamma_sum / 2.0;

  Scenario sd;
  sd.mode = Scenario::Mode::SingleTree;
  sd.sources = 10;
  sd.horizon_s = 15;
  sd.seed = 1;
  RunMetrics md = run_once(sd, 0.05, 0.0, 1);
  const double ratio = md.mean_nb_delay_ms() / md.delta_o_ms;

  const bool pass = gamma >= 720.0 && ratio >= 0.8 && ratio <= 1.2;
  report(4, pass,
         "gamma(0.05, q=10KB) = " + fmt(gamma, 1) + " Mb/s (>= 720), nb delay = " +
             fmt(md.mean_nb_delay_ms(), 3) + " ms = " + fmt(ratio, 3) +
             " x delta_o (within 20%)");
}

// ---------------------------------------------------------------------------
// 5. Flow-count distribution: all backlogged at rho = 0.9 for x = 2.5 and
//    x = 0.25; total-variation distance between the pooled time-weighted
//    histogram and the closed-form marginal <= 0.05.
void criterion5() {
  bool pass = true;
  std::string detail;
  for (std::int64_t q : {std::int64_t{1000}, std::int64_t{10000}}) {
    Scenario sc;
    sc.mode = Scenario::Mode::SingleTree;
    sc.sources = 10;
    sc.quantum_bytes = q;
    sc.mean_flow_mb = 2.0;
    sc.horizon_s = 600;
    sc.seed = 1;
    RunMetrics m = run_once(sc, 0.9, 1.0, 1);
    double tot = 0.0;
    for (double w : m.flow_count_weight) tot += w;
    const double x = sc.overhead_ratio_x();
    auto p = analytics::Params::symmetric(10, 0.9, x);
    double tv = 0.0;
    const std::size_t bins = std::max<std::size_t>(m.flow_count_weight.size(), 80);
    for (std::size_t n = 0; n < bins; ++n) {
      const double sim =
          n < m.flow_count_weight.size() && tot > 0 ? m.flow_count_weight[n] / tot : 0.0;
      tv += std::fabs(sim - analytics::stationary_marginal(static_cast<int>(n), 0.09, p));
    }
    tv /= 2.0;
    if (tv > 0.05) pass = false;
    detail += "TV(x=" + fmt(x, 2) + ") = " + fmt(tv, 4) + "  ";
  }
  report(5, pass, detail + "(<= 0.05 over >= 100 simulated seconds)");
}

// ---------------------------------------------------------------------------
// 6. Cycle time: all-backlogged single tree; mean grant-to-grant time per
//    source within 5% of S delta_r / (1 - rho). The formula is evaluated at
//    each run's realized offered load (exponential 10 MB flows leave the
//    finite-horizon load a few percent off its configured value, and the
//    1/(1-rho) amplification would otherwise be pure input noise).
void criterion6() {
  Scenario sc;
  sc.mode = Scenario::Mode::SingleTree;
  sc.sources = 10;
  sc.mean_flow_mb = 10.0;
  sc.seed = 1;
  bool pass = true;
  std::string detail;
  for (double rho : {0.3, 0.5, 0.8}) {
    sc.horizon_s = rho < 0.8 ? 120 : 240;
    const double window_s = to_s(sc.horizon() - sc.warmup());
    double ratio = 0.0, sim_us = 0.0;
    const int reps = 2;
    for (std::uint64_t s = 1; s <= reps; ++s) {
      RunMetrics m = run_once(sc, rho, 1.0, s);
      const double realized = m.realized_load(sc.capacity_bps(), window_s);
      const double expect_us =
          to_us(analytics::expected_cycle_time(10, sc.delta_r(), realized));
      ratio += m.mean_intervisit_us / expect_us;
      sim_us += m.mean_intervisit_us;
    }
    ratio /= reps;
    sim_us /= reps;
    const double err = std::fabs(ratio - 1.0);
    if (err > 0.05) pass = false;
    detail += "rho " + fmt(rho, 1) + ": " + fmt(sim_us, 2) + " us, sim/formula = " +
              fmt(ratio, 3) + "  ";
  }
  report(6, pass, detail + "(each within 5%)");
}

// ---------------------------------------------------------------------------
// 7. Schedule invariants, checked bit-exactly inside the engine on every
//    event (violations throw): zero burst overlap, leading edges d + delta_r
//    apart, inter-burst gap exactly delta_r while saturated, feasibility
//    under per-grant jitter in [0, tau], and per-grant time conservation.
//    The runs below exercise each check at scale.
void criterion7() {
  bool pass = true;
  std::string detail;
  try {
    Scenario sat;
    sat.mode = Scenario::Mode::SingleTree;
    sat.sources = 10;
    sat.mean_flow_mb = 2.0;
    sat.horizon_s = 60;
    sat.seed = 1;
    sat.clocks = Scenario::ClockModel::Random;
    RunMetrics a = run_once(sat, 0.9, 1.0, 1);
    detail += "overlap checks " + std::to_string(a.overlap_checks) + ", edge " +
              std::to_string(a.edge_checks) + ", saturated gaps " +
              std::to_string(a.saturated_gap_checks) + "; ";
    pass = pass && a.overlap_checks > 100000 && a.saturated_gap_checks > 10000;

    Scenario jit = sat;
    jit.jitter = Scenario::JitterModel::Uniform;
    jit.horizon_s = 30;
    RunMetrics b = run_once(jit, 0.7, 0.5, 2);
    detail += "feasibility (jittered) " + std::to_string(b.feasibility_checks) + "; ";
    pass = pass && b.feasibility_checks > 100000;

    Scenario net;
    net.mode = Scenario::Mode::Network;
    net.nodes = 10;
    net.transmitters = 1;
    net.mean_flow_mb = 2.0;
    net.horizon_s = 8;
    net.seed = 1;
    RunMetrics c = run_once(net, 0.5, 1.0, 1);
    detail += "conservation (blocked net) " + std::to_string(c.conservation_checks);
    pass = pass && c.conservation_checks > 100000 && c.blocked > 0;
  } catch (const std::exception& e) {
    pass = false;
    detail += std::string("violation: ") + e.what();
  }
  report(7, pass, detail);
}

// ---------------------------------------------------------------------------
// 8. Polling oracle: bounded time-average population below capacity, linear
//    growth above, and the Lyapunov drift sign flips across rho = 1.
void criterion8() {
  bool pass = true;
  std::string detail;
  const double mean_size = 8.0;
  for (double rho : {0.5, 0.9}) {
    auto p = oracle::OracleParams::symmetric(5, 1, rho, mean_size);
    const auto r = oracle::run_horizon(p, 1'000'000, 4.0, 11);
    const double stationary_scale = rho * 5.0 / (1.0 - rho);  // rho x / (1 - rho)
    const bool bounded = r.time_avg_flow_count < 20.0 * stationary_scale + 30.0 &&
                         static_cast<double>(r.final_flow_count) <
                             10.0 * (r.time_avg_flow_count + 10.0);
    if (!bounded) pass = false;
    detail += "L(rho=" + fmt(rho, 2) + ") avg " + fmt(r.time_avg_flow_count, 1) +
              (bounded ? " bounded; " : " UNBOUNDED; ");
  }
  for (double rho : {1.05, 1.2}) {
    auto p = oracle::OracleParams::symmetric(5, 1, rho, mean_size);
    const auto r = oracle::run_horizon(p, 1'000'000, 4.0, 12);
    const double slope =
        static_cast<double>(r.final_flow_count) / static_cast<double>(r.total_time);
    const double expect = (rho - 1.0) / mean_size;
    const bool linear = slope > 0.25 * expect && slope < 4.0 * expect;
    if (!linear) pass = false;
    detail += "slope(rho=" + fmt(rho, 2) + ") " + fmt(slope, 5) + " ~ " + fmt(expect, 5) +
              "; ";
  }
  {
    Rng init(3);
    oracle::PollingState big;
    big.flows.assign(5, {});
    for (auto& src : big.flows)
      for (int f = 0; f < 40; ++f) src.push_back(oracle::geometric_size(mean_size, init));
    Rng rng(13);
    auto sub = oracle::OracleParams::symmetric(5, 1, 0.8, mean_size);
    auto d_sub = oracle::drift_estimate(big, sub, 4.0, 10'000, rng);
    auto over = oracle::OracleParams::symmetric(5, 1, 1.2, mean_size);
    auto d_over = oracle::drift_estimate(big, over, 4.0, 10'000, rng);
    const bool signs = d_sub.mean_per_unit_time + d_sub.ci95_half < 0.0 &&
                       d_over.mean_per_unit_time - d_over.ci95_half > 0.0;
    if (!signs) pass = false;
    detail += "drift(0.8) " + fmt(d_sub.mean_per_unit_time, 3) + "+-" +
              fmt(d_sub.ci95_half, 3) + ", drift(1.2) " +
              fmt(d_over.mean_per_unit_time, 3) + "+-" + fmt(d_over.ci95_half, 3);
  }
  report(8, pass, detail);
}

// ---------------------------------------------------------------------------
// 9. Blocking-adjusted throughput line: 10x10 network, one transmitter,
//    all backlogged; measured throughput within 10% of
//    (1 - rho/(1-B)) C/(1+x) for rho <= 0.5.
void criterion9() {
  Scenario sc;
  sc.mode = Scenario::Mode::Network;
  sc.nodes = 10;
  sc.transmitters = 1;
  sc.mean_flow_mb = 10.0;
  sc.seed = 1;
  const double x = sc.overhead_ratio_x();
  const auto ml = analytics::max_load(1, sc.nodes + 1);
  auto base = analytics::Params::symmetric(10, 0.0, x);

  bool pass = true;
  double worst = 0.0;
  std::string detail = "rho* = " + fmt(ml.rho_star, 4) + "; ";
  for (double rho : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    // Blocking feedback slows mixing as the effective intensity rises, so
    // the upper loads need long horizons and seed averaging.
    const int reps = rho < 0.4 ? 1 : 2;
    sc.horizon_s = rho < 0.3 ? 60 : (rho < 0.4 ? 150 : 300);
    double gamma = 0.0;
    for (std::uint64_t s = 1; s <= reps; ++s)
      gamma += run_once(sc, rho, 1.0, s).mean_throughput_mbps();
    gamma /= reps;
    const double target = analytics::throughput_with_blocking(rho, base, ml.blocking) / 1e6;
    const double err = gamma / target - 1.0;
    worst = std::max(worst, std::fabs(err));
    if (std::fabs(err) > 0.10) pass = false;
    detail += fmt(rho, 1) + ": " + fmt(gamma, 1) + "/" + fmt(target, 1) + " (" +
              fmt(100 * err, 1) + "%)  ";
  }
  report(9, pass, detail + "worst " + fmt(100 * worst, 1) + "% (<= 10%)");
}

// ---------------------------------------------------------------------------
// 10. Determinism: identical scenario and seed give byte-identical CSV
//     output across two full command runs.
void criterion10() {
  namespace fs = std::filesystem;
  Scenario sc;
  sc.mode = Scenario::Mode::Network;
  sc.nodes = 4;
  sc.mean_flow_mb = 0.5;
  sc.horizon_s = 2;
  sc.seed = 9;
  sc.sweep_loads = {0.3, 0.6};
  sc.sweep_mixes = {0.0, 1.0};

  const fs::path base = fs::temp_directory_path() / "twin_acceptance_det";
  fs::remove_all(base);
  const auto files_a = experiment::cmd_network(sc, (base / "a").string(), 2);
  const auto files_b = experiment::cmd_network(sc, (base / "b").string(), 1);

  auto slurp = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  };
  bool pass = files_a.size() == files_b.size();
  int compared = 0;
  for (std::size_t i = 0; pass && i < files_a.size(); ++i) {
    if (slurp(files_a[i]) != slurp(files_b[i])) pass = false;
    ++compared;
  }
  report(10, pass,
         std::to_string(compared) +
             " output files byte-identical across two runs "
             "(including jobs=2 vs jobs=1)");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf("%s (%d/10 criteria, %.0f s)\n", failures == 0 ? "ALL PASS" : "FAILURES",
              10 - failures, run_seconds(t0));
  return failures == 0 ? 0 : 1;
}

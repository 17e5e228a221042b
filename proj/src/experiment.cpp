#include "twin/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "twin/analytics.hpp"
#include "twin/error.hpp"
#include "twin/sim_engine.hpp"

namespace twin::experiment {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// In the blocking formulas R-1 counts the destinations that can hold a
// simultaneous grant at one source; the symmetric network has `nodes` of
// them, so the formula parameter is nodes + 1.
int formula_nodes(const Scenario& sc) { return sc.nodes + 1; }

analytics::Params analytic_params(const Scenario& sc, double load, double mix) {
  analytics::Params p = analytics::Params::symmetric(sc.sources_per_tree(), load,
                                                     sc.overhead_ratio_x());
  p.capacity_bps = sc.capacity_bps();
  p.nodes = formula_nodes(sc);
  p.transmitters = sc.transmitters;
  p.rho_nonbacklogged = load * (1.0 - mix);
  return p;
}

// Analytic throughput overlay: capacity/demand reduction for the
// non-backlogged share, then the (1-rho) C/(1+x) law, with the blocking
// x-intercept folded in for network scenarios.
double analytic_throughput_mbps(const Scenario& sc, double load, double mix) {
  if (mix <= 0.0) return 0.0;
  analytics::Params p = analytic_params(sc, load, mix);
  if (sc.mode == Scenario::Mode::Network) {
    const auto ml = analytics::max_load(sc.transmitters, formula_nodes(sc));
    const analytics::Params r = p.reduced();
    return analytics::throughput_with_blocking(r.rho, r, ml.blocking) / 1e6;
  }
  const analytics::Params r = p.reduced();
  if (r.rho >= 1.0) return 0.0;
  return analytics::flow_throughput_bps(r) / 1e6;
}

std::vector<double> default_mixes(const Scenario& sc) {
  if (!sc.sweep_mixes.empty()) return sc.sweep_mixes;
  return {0.0, 0.2, 0.6, 1.0};
}

std::vector<double> require_loads(const Scenario& sc) {
  if (sc.sweep_loads.empty())
    throw SimError("no sweep loads configured (set `loads = ...`)");
  return sc.sweep_loads;
}

std::string join_dir(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string csv_preamble(const Scenario& sc) {
  std::ostringstream o;
  o << "# scenario_hash = " << hex64(sc.hash()) << "\n";
  o << "# seed = " << sc.seed << "\n";
  std::istringstream echo(sc.echo());
  std::string line;
  while (std::getline(echo, line)) o << "# cfg: " << line << "\n";
  return o.str();
}

std::string sweep_csv(const Scenario& sc, const std::vector<SweepPoint>& points) {
  std::ostringstream o;
  o << csv_preamble(sc);
  o << "load,mix,mean_nb_delay_ms,mean_throughput_mbps,blocked_fraction,"
       "ci95_nb_delay_ms,ci95_throughput_mbps,ci95_blocked_fraction\n";
  for (const auto& p : points) {
    o << format_double(p.load, 4) << ',' << format_double(p.mix, 4) << ','
      << format_double(p.nb_delay_ms.mean) << ',' << format_double(p.throughput_mbps.mean, 4)
      << ',' << format_double(p.blocked_fraction.mean) << ','
      << format_double(p.nb_delay_ms.ci95) << ',' << format_double(p.throughput_mbps.ci95, 4)
      << ',' << format_double(p.blocked_fraction.ci95) << "\n";
  }
  return o.str();
}

std::string results_json(const Scenario& sc, const std::vector<SweepPoint>& points) {
  ordered_json j;
  j["scenario_hash"] = hex64(sc.hash());
  j["seed"] = sc.seed;
  j["config_echo"] = sc.echo();
  j["points"] = ordered_json::array();
  for (const auto& p : points) {
    ordered_json pt;
    pt["load"] = p.load;
    pt["mix"] = p.mix;
    pt["mean_nb_delay_ms"] = p.nb_delay_ms.mean;
    pt["ci95_nb_delay_ms"] = p.nb_delay_ms.ci95;
    pt["mean_throughput_mbps"] = p.throughput_mbps.mean;
    pt["ci95_throughput_mbps"] = p.throughput_mbps.ci95;
    pt["blocked_fraction"] = p.blocked_fraction.mean;
    pt["mean_intervisit_us"] = p.intervisit_us.mean;
    pt["runs"] = ordered_json::array();
    for (const auto& r : p.runs) {
      ordered_json rr;
      rr["seed"] = r.seed;
      rr["nb_packets"] = r.nb_packets;
      rr["mean_nb_delay_ms"] = r.mean_nb_delay_ms();
      rr["flows_completed"] = r.flows_completed;
      rr["mean_throughput_mbps"] = r.mean_throughput_mbps();
      rr["mean_per_flow_rate_mbps"] = r.mean_per_flow_rate_mbps();
      rr["blocked_fraction"] = r.blocked_fraction();
      rr["granted_us"] = to_us(r.granted);
      rr["blocked_us"] = to_us(r.blocked);
      rr["forfeited_us"] = to_us(r.forfeited);
      rr["busy_us"] = to_us(r.busy);
      rr["overhead_us"] = to_us(r.overhead);
      rr["idle_us"] = to_us(r.idle);
      rr["mean_intervisit_us"] = r.mean_intervisit_us;
      rr["delta_o_ms"] = r.delta_o_ms;
      rr["flow_count_watermark"] = r.flow_count_watermark;
      rr["tx_peak_overlap"] = r.tx_peak_overlap;
      rr["grants_issued"] = r.grants_issued;
      rr["grants_unserved"] = r.grants_unserved;
      rr["bursts"] = r.bursts;
      rr["low_confidence"] = r.low_confidence;
      rr["checks"] = {{"overlap", r.overlap_checks},
                      {"edge", r.edge_checks},
                      {"saturated_gap", r.saturated_gap_checks},
                      {"conservation", r.conservation_checks},
                      {"feasibility", r.feasibility_checks}};
      pt["runs"].push_back(std::move(rr));
    }
    j["points"].push_back(std::move(pt));
  }
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& body) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw SimError("cannot write " + path);
  f << body;
}

std::vector<std::string> cmd_single_tree(const Scenario& sc_in, const std::string& out_dir,
                                         int jobs) {
  Scenario sc = sc_in;
  sc.mode = Scenario::Mode::SingleTree;
  sc.sweep_loads = require_loads(sc);
  sc.sweep_mixes = default_mixes(sc);
  const auto points = run_single_tree(sc, jobs);

  std::ostringstream fig4, fig5;
  fig4 << csv_preamble(sc) << "load,mix,sim_delay_ms,ci95_ms,delta_o_ms\n";
  fig5 << csv_preamble(sc) << "load,mix,sim_throughput_mbps,ci95_mbps,analytic_mbps\n";
  for (const auto& p : points) {
    const double delta_o = p.runs.empty() ? 0.0 : p.runs.front().delta_o_ms;
    if (p.mix < 1.0)
      fig4 << format_double(p.load, 4) << ',' << format_double(p.mix, 4) << ','
           << format_double(p.nb_delay_ms.mean) << ',' << format_double(p.nb_delay_ms.ci95)
           << ',' << format_double(delta_o) << "\n";
    if (p.mix > 0.0)
      fig5 << format_double(p.load, 4) << ',' << format_double(p.mix, 4) << ','
           << format_double(p.throughput_mbps.mean, 4) << ','
           << format_double(p.throughput_mbps.ci95, 4) << ','
           << format_double(analytic_throughput_mbps(sc, p.load, p.mix), 4) << "\n";
  }

  // Flow-count histograms at 90% all-backlogged load for the two quantum
  // sizes, pooled over sources and overlaid with the closed-form marginal.
  std::ostringstream fig7;
  fig7 << csv_preamble(sc) << "quantum_bytes,x,n,sim_prob,analytic_prob\n";
  for (std::int64_t q : {std::int64_t{1000}, std::int64_t{10000}}) {
    Scenario hsc = sc;
    hsc.quantum_bytes = q;
    hsc.sweep_loads.clear();
    hsc.sweep_mixes.clear();
    hsc.load = 0.9;
    hsc.backlogged_fraction = 1.0;
    const RunMetrics m = run_once(hsc, 0.9, 1.0, hsc.seed);
    double total = 0.0;
    for (double w : m.flow_count_weight) total += w;
    const double x = hsc.overhead_ratio_x();
    analytics::Params ap = analytics::Params::symmetric(hsc.sources, 0.9, x);
    const std::size_t bins = std::max<std::size_t>(m.flow_count_weight.size(), 30);
    for (std::size_t n = 0; n < bins; ++n) {
      const double sim =
          n < m.flow_count_weight.size() && total > 0 ? m.flow_count_weight[n] / total : 0.0;
      const double closed_form = analytics::stationary_marginal(static_cast<int>(n),
                                                        0.9 / hsc.sources, ap);
      fig7 << q << ',' << format_double(x, 4) << ',' << n << ',' << format_double(sim, 8)
           << ',' << format_double(closed_form, 8) << "\n";
    }
  }

  const std::vector<std::string> files = {join_dir(out_dir, "fig4_delay.csv"),
                                          join_dir(out_dir, "fig5_throughput.csv"),
                                          join_dir(out_dir, "fig7_hist.csv"),
                                          join_dir(out_dir, "single_tree_sweep.csv"),
                                          join_dir(out_dir, "single_tree_results.json")};
  write_file(files[0], fig4.str());
  write_file(files[1], fig5.str());
  write_file(files[2], fig7.str());
  write_file(files[3], sweep_csv(sc, points));
  write_file(files[4], results_json(sc, points));
  return files;
}

std::vector<std::string> cmd_network(const Scenario& sc_in, const std::string& out_dir,
                                     int jobs) {
  Scenario sc = sc_in;
  sc.mode = Scenario::Mode::Network;
  sc.sweep_loads = require_loads(sc);
  sc.sweep_mixes = default_mixes(sc);
  const auto points = run_network(sc, jobs);
  const auto ml = analytics::max_load(sc.transmitters, formula_nodes(sc));

  std::ostringstream fig8, fig9;
  fig8 << csv_preamble(sc) << "load,mix,sim_delay_ms,ci95_ms,delta_o_ms,rho_star\n";
  fig9 << csv_preamble(sc) << "load,mix,sim_throughput_mbps,ci95_mbps,analytic_mbps,rho_star\n";
  for (const auto& p : points) {
    const double delta_o = p.runs.empty() ? 0.0 : p.runs.front().delta_o_ms;
    if (p.mix < 1.0)
      fig8 << format_double(p.load, 4) << ',' << format_double(p.mix, 4) << ','
           << format_double(p.nb_delay_ms.mean) << ',' << format_double(p.nb_delay_ms.ci95)
           << ',' << format_double(delta_o) << ',' << format_double(ml.rho_star) << "\n";
    if (p.mix > 0.0)
      fig9 << format_double(p.load, 4) << ',' << format_double(p.mix, 4) << ','
           << format_double(p.throughput_mbps.mean, 4) << ','
           << format_double(p.throughput_mbps.ci95, 4) << ','
           << format_double(analytic_throughput_mbps(sc, p.load, p.mix), 4) << ','
           << format_double(ml.rho_star) << "\n";
  }

  const std::vector<std::string> files = {join_dir(out_dir, "fig8_delay.csv"),
                                          join_dir(out_dir, "fig9_throughput.csv"),
                                          join_dir(out_dir, "network_sweep.csv"),
                                          join_dir(out_dir, "network_results.json")};
  write_file(files[0], fig8.str());
  write_file(files[1], fig9.str());
  write_file(files[2], sweep_csv(sc, points));
  write_file(files[3], results_json(sc, points));
  return files;
}

std::vector<std::string> cmd_blocking(const std::vector<int>& transmitters,
                                      const std::vector<int>& nodes,
                                      const std::string& out_dir) {
  std::ostringstream o;
  o << "# fractional capacity loss at the transmitter limit; nodes = 0 marks "
       "the large-network (Poisson) limit\n";
  o << "transmitters,nodes,blocking,rho_star\n";
  for (int t : transmitters) {
    for (int r : nodes) {
      const auto ml = analytics::max_load(t, r);
      o << t << ',' << r << ',' << format_double(ml.blocking, 8) << ','
        << format_double(ml.rho_star, 8) << "\n";
    }
    const auto lim = analytics::max_load(t, 2, /*poisson_limit=*/true);
    o << t << ",0," << format_double(lim.blocking, 8) << ','
      << format_double(lim.rho_star, 8) << "\n";
  }
  const std::vector<std::string> files = {join_dir(out_dir, "fig6_blocking.csv")};
  write_file(files[0], o.str());
  return files;
}

std::vector<std::string> cmd_analytics(const Scenario& sc_in, const std::string& out_dir) {
  Scenario sc = sc_in;
  sc.sweep_loads = require_loads(sc);
  sc.sweep_mixes = default_mixes(sc);
  const auto delta_o = compute_delta_o(sc);
  double delta_o_ms = 0.0;
  for (auto d : delta_o) delta_o_ms += to_ms(d);
  delta_o_ms /= static_cast<double>(delta_o.size());

  std::ostringstream o;
  o << csv_preamble(sc);
  o << "load,mix,mean_nb_delay_ms,mean_throughput_mbps,blocked_fraction,"
       "ci95_nb_delay_ms,ci95_throughput_mbps,ci95_blocked_fraction\n";
  for (double mix : sc.sweep_mixes) {
    for (double load : sc.sweep_loads) {
      double blocked = 0.0;
      if (sc.mode == Scenario::Mode::Network) {
        const auto fp = analytics::effective_intensity(sc.transmitters, formula_nodes(sc), load);
        blocked = fp ? analytics::blocking_fraction(sc.transmitters, formula_nodes(sc), *fp)
                     : analytics::max_load(sc.transmitters, formula_nodes(sc)).blocking;
      }
      o << format_double(load, 4) << ',' << format_double(mix, 4) << ','
        << format_double(delta_o_ms) << ','
        << format_double(analytic_throughput_mbps(sc, load, mix), 4) << ','
        << format_double(blocked) << ",0.000000,0.0000,0.000000\n";
    }
  }
  const std::vector<std::string> files = {join_dir(out_dir, "analytic_curves.csv")};
  write_file(files[0], o.str());
  return files;
}

std::vector<std::string> cmd_oracle(const oracle::OracleParams& params, std::int64_t cycles,
                                    double alpha, std::uint64_t seed,
                                    const std::string& out_dir) {
  const auto result = oracle::run_horizon(params, 0, alpha, seed, 100000, cycles);
  std::ostringstream o;
  o << "# rho = " << format_double(params.load(), 6) << ", sources = " << params.sources
    << ", overhead = " << params.total_overhead() << ", seed = " << seed << "\n";
  o << "cycle,time,flow_count,lyapunov\n";
  for (const auto& s : result.samples)
    o << s.cycle << ',' << s.time << ',' << s.flow_count << ','
      << format_double(s.norm, 2) << "\n";
  const std::vector<std::string> files = {join_dir(out_dir, "oracle_trace.csv")};
  write_file(files[0], o.str());
  return files;
}

}  // namespace twin::experiment

// twinsim: flow-aware TWIN MAC simulator and analytic toolbox.
//
// Subcommands: single-tree, network, blocking, analytics, oracle. Outputs
// are figure-ready CSV plus a JSON results file; identical config and seed
// reproduce byte-identical CSV bodies. Exits nonzero on any schedule or
// accounting invariant violation.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twin/analytics.hpp"
#include "twin/error.hpp"
#include "twin/experiment.hpp"
#include "twin/polling_oracle.hpp"
#include "twin/scenario.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string loads;
  int jobs = 1;
};

twin::Scenario make_scenario(const CommonOpts& o) {
  twin::Scenario sc = o.config.empty() ? twin::Scenario{} : twin::load_scenario(o.config);
  if (o.seed_set) sc.seed = o.seed;
  if (!o.loads.empty()) sc.sweep_loads = twin::parse_double_list(o.loads);
  sc.validate();
  return sc;
}

std::string out_dir(const CommonOpts& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("TWINSIM_OUT")) return env;
  return ".";
}

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "scenario config file (key = value)");
  cmd->add_option("--out", o.out, "output directory (default $TWINSIM_OUT or .)");
  cmd->add_option("--seed", o.seed, "override scenario seed")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--loads", o.loads, "comma-separated sweep loads");
  cmd->add_option("--jobs", o.jobs, "parallel sweep workers");
}

void report_files(const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flow-aware TWIN MAC simulator"};
  app.require_subcommand(1);

  CommonOpts tree_opts, net_opts, ana_opts;
  auto* tree = app.add_subcommand("single-tree", "isolated destination tree sweep");
  add_common(tree, tree_opts);
  auto* net = app.add_subcommand("network", "symmetric network sweep");
  add_common(net, net_opts);

  auto* blocking = app.add_subcommand("blocking", "transmitter blocking curves");
  std::string blk_out;
  std::vector<int> blk_t{1, 2, 3, 4};
  int blk_rmin = 2, blk_rmax = 40;
  blocking->add_option("--out", blk_out, "output directory");
  blocking->add_option("--transmitters", blk_t, "transmitter counts");
  blocking->add_option("--r-min", blk_rmin, "smallest node count");
  blocking->add_option("--r-max", blk_rmax, "largest node count");

  auto* ana = app.add_subcommand("analytics", "closed-form curves for overlay");
  add_common(ana, ana_opts);

  auto* orc = app.add_subcommand("oracle", "discrete polling stability oracle");
  double orc_rho = 0.9, orc_alpha = 4.0, orc_mean_size = 8.0;
  int orc_sources = 5;
  std::int64_t orc_overhead = 1, orc_cycles = 10000;
  std::uint64_t orc_seed = 1;
  std::string orc_out;
  orc->add_option("--rho", orc_rho, "offered load");
  orc->add_option("--sources", orc_sources, "source count");
  orc->add_option("--overheads", orc_overhead, "per-source switch overhead (time units)");
  orc->add_option("--mean-size", orc_mean_size, "mean flow size (time units)");
  orc->add_option("--cycles", orc_cycles, "cycles to run");
  orc->add_option("--alpha", orc_alpha, "Lyapunov linear coefficient");
  orc->add_option("--seed", orc_seed, "rng seed");
  orc->add_option("--out", orc_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tree->parsed()) {
      report_files(twin::experiment::cmd_single_tree(make_scenario(tree_opts),
                                                     out_dir(tree_opts), tree_opts.jobs));
    } else if (net->parsed()) {
      twin::Scenario sc = make_scenario(net_opts);
      sc.mode = twin::Scenario::Mode::Network;
      report_files(twin::experiment::cmd_network(sc, out_dir(net_opts), net_opts.jobs));
    } else if (blocking->parsed()) {
      if (blk_rmin < 2 || blk_rmax < blk_rmin) throw twin::SimError("bad node range");
      std::vector<int> nodes;
      for (int r = blk_rmin; r <= blk_rmax; ++r) nodes.push_back(r);
      std::string dir = blk_out.empty() ? out_dir(CommonOpts{}) : blk_out;
      report_files(twin::experiment::cmd_blocking(blk_t, nodes, dir));
    } else if (ana->parsed()) {
      report_files(twin::experiment::cmd_analytics(make_scenario(ana_opts),
                                                   out_dir(ana_opts)));
    } else if (orc->parsed()) {
      auto params = twin::oracle::OracleParams::symmetric(orc_sources, orc_overhead,
                                                          orc_rho, orc_mean_size);
      std::string dir = orc_out.empty() ? out_dir(CommonOpts{}) : orc_out;
      report_files(
          twin::experiment::cmd_oracle(params, orc_cycles, orc_alpha, orc_seed, dir));
    }
  } catch (const twin::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "twin/error.hpp"
#include "twin/experiment.hpp"
#include "twin/polling_oracle.hpp"

using namespace twin;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / "twin_experiment_tests" / leaf;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("csv preamble embeds hash, seed and config echo") {
  Scenario sc;
  sc.seed = 123;
  const std::string pre = experiment::csv_preamble(sc);
  CHECK(pre.find("# scenario_hash = 0x") != std::string::npos);
  CHECK(pre.find("# seed = 123") != std::string::npos);
  CHECK(pre.find("# cfg: quantum_bytes = 1000") != std::string::npos);
}

TEST_CASE("analytics command emits overlay curves aligned with the sweep layout") {
  Scenario sc;
  sc.mode = Scenario::Mode::SingleTree;
  sc.sources = 10;
  sc.sweep_loads = {0.1, 0.5};
  sc.sweep_mixes = {1.0};
  const auto dir = scratch("analytics");
  const auto files = experiment::cmd_analytics(sc, dir.string());
  REQUIRE(files.size() == 1);
  const std::string body = slurp(files[0]);
  CHECK(body.find("load,mix,mean_nb_delay_ms,mean_throughput_mbps,blocked_fraction") !=
        std::string::npos);
  // (1-rho) C/(1+x) at rho = 0.5, x = 2.5.
  CHECK(body.find("0.5000,1.0000,") != std::string::npos);
  CHECK(body.find("142.8571") != std::string::npos);

  // Identical scenario reproduces identical bytes.
  const auto dir2 = scratch("analytics2");
  const auto files2 = experiment::cmd_analytics(sc, dir2.string());
  CHECK(slurp(files2[0]) == body);
}

TEST_CASE("analytics command requires sweep loads") {
  Scenario sc;
  CHECK_THROWS_AS(experiment::cmd_analytics(sc, scratch("empty").string()), SimError);
}

TEST_CASE("blocking command covers the requested grid plus the limit rows") {
  const auto dir = scratch("blocking");
  const auto files = experiment::cmd_blocking({1, 2}, {4, 10}, dir.string());
  const std::string body = slurp(files[0]);
  CHECK(body.find("1,10,0.34643942,0.65356058") != std::string::npos);
  CHECK(body.find("1,0,0.36787944,0.63212056") != std::string::npos);  // limit row
  CHECK(body.find("2,0,0.10363832,") != std::string::npos);
}

TEST_CASE("oracle command writes a trace") {
  const auto dir = scratch("oracle");
  auto params = oracle::OracleParams::symmetric(5, 1, 0.9, 8.0);
  const auto files = experiment::cmd_oracle(params, 2000, 4.0, 3, dir.string());
  const std::string body = slurp(files[0]);
  CHECK(body.find("cycle,time,flow_count,lyapunov") != std::string::npos);
  CHECK(std::count(body.begin(), body.end(), '\n') > 100);
}

#pragma once

#include <string>
#include <vector>

#include "twin/metrics.hpp"
#include "twin/polling_oracle.hpp"
#include "twin/scenario.hpp"

namespace twin::experiment {

// CSV bodies are a bit-exact contract: '.' decimal, comma separator, one
// header row, fixed-precision numbers. Every file starts with comment lines
// embedding the scenario hash, seed and full config echo, so identical
// configs reproduce identical bytes.
std::string format_double(double v, int decimals = 6);
std::string csv_preamble(const Scenario& sc);

std::string sweep_csv(const Scenario& sc, const std::vector<SweepPoint>& points);
std::string results_json(const Scenario& sc, const std::vector<SweepPoint>& points);

void write_file(const std::string& path, const std::string& body);

// Figure-ready outputs. Each returns the list of files written.
std::vector<std::string> cmd_single_tree(const Scenario& sc, const std::string& out_dir,
                                         int jobs);
std::vector<std::string> cmd_network(const Scenario& sc, const std::string& out_dir,
                                     int jobs);
std::vector<std::string> cmd_blocking(const std::vector<int>& transmitters,
                                      const std::vector<int>& nodes,
                                      const std::string& out_dir);
std::vector<std::string> cmd_analytics(const Scenario& sc, const std::string& out_dir);
std::vector<std::string> cmd_oracle(const oracle::OracleParams& params,
                                    std::int64_t cycles, double alpha,
                                    std::uint64_t seed, const std::string& out_dir);

}  // namespace twin::experiment

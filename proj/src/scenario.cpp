#include "twin/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "twin/error.hpp"

namespace twin {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw SimError("bad numeric value for '" + key + "': " + v);
  }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw SimError("expected integer for '" + key + "': " + v);
  return static_cast<std::int64_t>(d);
}

}  // namespace

double Scenario::quantum_time_us() const {
  return static_cast<double>(quantum_bytes) * 8.0 / capacity_bps() * 1e6;
}

double Scenario::overhead_ratio_x() const {
  return static_cast<double>(sources_per_tree()) * delta_r_us / quantum_time_us();
}

void Scenario::validate() const {
  if (mode == Mode::SingleTree && sources < 1) throw SimError("need sources >= 1");
  if (mode == Mode::Network && nodes < 2) throw SimError("need nodes >= 2");
  if (transmitters < 1) throw SimError("need transmitters >= 1");
  if (delta_r_us <= 0) throw SimError("delta_r_us must be positive");
  if (tau_ms < 0) throw SimError("tau_ms must be nonnegative");
  if (quantum_bytes < 1 || packet_bytes < 1) throw SimError("quantum/packet bytes >= 1");
  if (capacity_gbps <= 0) throw SimError("capacity must be positive");
  if (load < 0 || backlogged_fraction < 0 || backlogged_fraction > 1)
    throw SimError("load must be >= 0 and mix within [0,1]");
  if (horizon_s <= 0 || warmup_frac < 0 || warmup_frac >= 1)
    throw SimError("bad horizon/warmup");
  if (rtt_min_ms <= 0 || rtt_max_ms < rtt_min_ms) throw SimError("bad RTT range");
  if (replications < 1) throw SimError("replications >= 1");
  if (size_dist != "exponential" && size_dist != "deterministic" &&
      size_dist != "hyperexponential")
    throw SimError("unknown size_dist: " + size_dist);
}

std::string Scenario::echo() const {
  std::ostringstream o;
  o << "mode = " << (mode == Mode::Network ? "network" : "single-tree") << "\n"
    << "sources = " << sources << "\n"
    << "nodes = " << nodes << "\n"
    << "transmitters_per_source = " << transmitters << "\n"
    << "delta_r_us = " << delta_r_us << "\n"
    << "tau_ms = " << tau_ms << "\n"
    << "quantum_bytes = " << quantum_bytes << "\n"
    << "packet_bytes = " << packet_bytes << "\n"
    << "grant_jitter_model = " << (jitter == JitterModel::Uniform ? "uniform" : "none")
    << "\n"
    << "max_grant_us = " << max_grant_us << "\n"
    << "retune_guard_us = " << retune_guard_us << "\n"
    << "capacity_gbps = " << capacity_gbps << "\n"
    << "load = " << load << "\n"
    << "backlogged_fraction = " << backlogged_fraction << "\n"
    << "mean_flow_mb = " << mean_flow_mb << "\n"
    << "nb_rate_mbps = " << nb_rate_mbps << "\n"
    << "nb_duration_s = " << nb_duration_s << "\n"
    << "size_dist = " << size_dist << "\n"
    << "rtt_min_ms = " << rtt_min_ms << "\n"
    << "rtt_max_ms = " << rtt_max_ms << "\n"
    << "clock_offset_model = " << (clocks == ClockModel::Random ? "random" : "zero")
    << "\n"
    << "horizon_s = " << horizon_s << "\n"
    << "warmup_frac = " << warmup_frac << "\n"
    << "seed = " << seed << "\n"
    << "replications = " << replications << "\n";
  for (const auto& [pair, us] : delay_us)
    o << "delay_us." << pair.first << "." << pair.second << " = " << us << "\n";
  if (!sweep_loads.empty()) {
    o << "loads = ";
    for (std::size_t i = 0; i < sweep_loads.size(); ++i)
      o << (i ? "," : "") << sweep_loads[i];
    o << "\n";
  }
  if (!sweep_mixes.empty()) {
    o << "mixes = ";
    for (std::size_t i = 0; i < sweep_mixes.size(); ++i)
      o << (i ? "," : "") << sweep_mixes[i];
    o << "\n";
  }
  return o.str();
}

std::uint64_t Scenario::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : echo()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double("list", item));
  }
  return out;
}

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find_first_of("#;");
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') continue;  // sections are cosmetic
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SimError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "mode") {
      if (value == "single-tree")
        s.mode = Scenario::Mode::SingleTree;
      else if (value == "network")
        s.mode = Scenario::Mode::Network;
      else
        throw SimError("unknown mode: " + value);
    } else if (key == "sources") {
      s.sources = static_cast<int>(to_int(key, value));
    } else if (key == "nodes") {
      s.nodes = static_cast<int>(to_int(key, value));
    } else if (key == "transmitters_per_source") {
      s.transmitters = static_cast<int>(to_int(key, value));
    } else if (key == "delta_r_us") {
      s.delta_r_us = to_double(key, value);
    } else if (key == "tau_ms") {
      s.tau_ms = to_double(key, value);
    } else if (key == "quantum_bytes") {
      s.quantum_bytes = to_int(key, value);
    } else if (key == "packet_bytes") {
      s.packet_bytes = to_int(key, value);
    } else if (key == "grant_jitter_model") {
      if (value == "none")
        s.jitter = Scenario::JitterModel::None;
      else if (value == "uniform")
        s.jitter = Scenario::JitterModel::Uniform;
      else
        throw SimError("unknown grant_jitter_model: " + value);
    } else if (key == "max_grant_us") {
      s.max_grant_us = to_double(key, value);
    } else if (key == "retune_guard_us") {
      s.retune_guard_us = to_double(key, value);
    } else if (key == "capacity_gbps") {
      s.capacity_gbps = to_double(key, value);
    } else if (key == "load") {
      s.load = to_double(key, value);
    } else if (key == "backlogged_fraction") {
      s.backlogged_fraction = to_double(key, value);
    } else if (key == "mean_flow_mb") {
      s.mean_flow_mb = to_double(key, value);
    } else if (key == "nb_rate_mbps") {
      s.nb_rate_mbps = to_double(key, value);
    } else if (key == "nb_duration_s") {
      s.nb_duration_s = to_double(key, value);
    } else if (key == "size_dist") {
      s.size_dist = value;
    } else if (key == "rtt_min_ms") {
      s.rtt_min_ms = to_double(key, value);
    } else if (key == "rtt_max_ms") {
      s.rtt_max_ms = to_double(key, value);
    } else if (key == "clock_offset_model") {
      if (value == "zero")
        s.clocks = Scenario::ClockModel::Zero;
      else if (value == "random")
        s.clocks = Scenario::ClockModel::Random;
      else
        throw SimError("unknown clock_offset_model: " + value);
    } else if (key == "horizon_s") {
      s.horizon_s = to_double(key, value);
    } else if (key == "warmup_frac") {
      s.warmup_frac = to_double(key, value);
    } else if (key == "seed") {
      s.seed = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "replications") {
      s.replications = static_cast<int>(to_int(key, value));
    } else if (key == "loads") {
      s.sweep_loads = parse_double_list(value);
    } else if (key == "mixes") {
      s.sweep_mixes = parse_double_list(value);
    } else if (key.rfind("delay_us.", 0) == 0) {
      const auto rest = key.substr(9);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) throw SimError("delay key needs delay_us.<i>.<j>");
      const int from = static_cast<int>(to_int(key, rest.substr(0, dot)));
      const int to = static_cast<int>(to_int(key, rest.substr(dot + 1)));
      s.delay_us[{from, to}] = to_double(key, value);
    } else {
      throw SimError("unknown config key: " + key);
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SimError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace twin

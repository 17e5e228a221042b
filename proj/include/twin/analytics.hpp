#pragma once

#include <optional>
#include <span>
#include <vector>

#include "twin/time.hpp"

namespace twin::analytics {

// Parameters of the processor-sharing and blocking formulas. x is the
// overhead ratio: a per-grant overhead delta_r equals x*q/S where q is the
// quantum transmission time, so x = S*delta_r/q.
struct Params {
  double rho = 0.0;               // total offered load, fraction of capacity
  std::vector<double> rho_i;      // per-source loads; sum must equal rho
  double x = 2.5;                 // overhead ratio
  double capacity_bps = 1e9;      // channel rate C
  int sources = 10;               // S
  int nodes = 10;                 // R
  int transmitters = 1;           // t
  double rho_nonbacklogged = 0.0; // share of rho carried by rate-limited flows

  static Params symmetric(int sources, double rho, double x);

  // Capacity/demand reduction for priority-served non-backlogged traffic:
  // C <- C(1 - rho_n), rho <- rho_b / (1 - rho_n).
  Params reduced() const;
};

// Joint stationary distribution of per-source flow counts,
// pi(n) = (m+x)_m prod(rho_i^n_i / n_i!) (1-rho)^(1+x) with m = sum(n_i)
// and (y)_r the falling product. Evaluated in log space.
double stationary_joint(std::span<const int> n, const Params& p);

// Distribution of the total flow count, omega(m), and the per-source
// marginal pi_i(n_i) under rho_tilde_i = rho_i / (1 - rho + rho_i).
double stationary_total(int m, const Params& p);
double stationary_marginal(int n_i, double rho_i, const Params& p);

double mean_flows_per_source(double rho_i, const Params& p);  // rho_i(1+x)/(1-rho)
double mean_flows_total(const Params& p);                     // rho(1+x)/(1-rho)

// Per-flow throughput gamma = (1-rho) C / (1+x), applied after the
// non-backlogged reduction when rho_nonbacklogged > 0.
double flow_throughput_bps(const Params& p);

// Distribution of the number of grants covering a random instant at one
// source: binomial(R-1, rho'/(R-1)), or its Poisson(rho') limit.
double grant_overlap_pmf(int n, int nodes, double rho_prime, bool poisson_limit = false);

// Fraction of grant time blocked with t transmitters:
// B_t = E[(G - t)+] / E[G].
double blocking_fraction(int t, int nodes, double rho_prime, bool poisson_limit = false);

// Capacity limit for t transmitters in an R-node network: evaluates the
// blocking fraction at rho' = min(t, 1) and returns rho* = rho' (1 - B*).
struct MaxLoad {
  double rho_star = 0.0;
  double blocking = 0.0;
};
MaxLoad max_load(int t, int nodes, bool poisson_limit = false);

// Light-traffic-anchored linear approximation:
// gamma ~= (1 - rho/(1-B_t)) C/(1+x); zero at and beyond rho = 1-B_t.
double throughput_with_blocking(double rho, const Params& p, double b_t);

// Mean time between successive grants to the same source, S*delta_r/(1-rho).
TimeSpan expected_cycle_time(int sources, TimeSpan delta_r, double rho);

// Fixed point of rho' = rho / (1 - B_t(rho')); empty when the load cannot
// be carried (no fixed point below the transmitter limit).
std::optional<double> effective_intensity(int t, int nodes, double rho,
                                          bool poisson_limit = false);

}  // namespace twin::analytics

#include "twin/analytics.hpp"

#include <cmath>
#include <cstdlib>

#include "twin/error.hpp"

namespace twin::analytics {
namespace {

void require_stationary(const Params& p) {
  if (!(p.rho < 1.0)) throw SimError("stationary distribution requires rho < 1");
  if (p.x <= 0) throw SimError("overhead ratio x must be positive");
}

// log of the falling product (m+x)_m = prod_{j=1..m} (x+j), real x >= 0.
double log_falling(int m, double x) {
  return std::lgamma(x + m + 1.0) - std::lgamma(x + 1.0);
}

double binom_log_pmf(int n, int trials, double p) {
  if (p <= 0.0) return n == 0 ? 0.0 : -INFINITY;
  if (p >= 1.0) return n == trials ? 0.0 : -INFINITY;
  return std::lgamma(trials + 1.0) - std::lgamma(n + 1.0) - std::lgamma(trials - n + 1.0) +
         n * std::log(p) + (trials - n) * std::log1p(-p);
}

double poisson_log_pmf(int n, double mean) {
  if (mean <= 0.0) return n == 0 ? 0.0 : -INFINITY;
  return n * std::log(mean) - mean - std::lgamma(n + 1.0);
}

// E[(G - t)+] = E[G] - t + sum_{n<t} (t-n) g_n; the second form needs only
// t terms of the pmf, so it is exact for the Poisson case too.
double mean_excess(int t, int nodes, double rho_prime, bool poisson_limit) {
  double deficit = 0.0;
  for (int n = 0; n < t; ++n) {
    double lp = poisson_limit ? poisson_log_pmf(n, rho_prime)
                              : binom_log_pmf(n, nodes - 1, rho_prime / (nodes - 1));
    deficit += (t - n) * std::exp(lp);
  }
  return rho_prime - t + deficit;
}

}  // namespace

Params Params::symmetric(int sources, double rho, double x) {
  Params p;
  p.sources = sources;
  p.rho = rho;
  p.rho_i.assign(sources, rho / sources);
  p.x = x;
  return p;
}

Params Params::reduced() const {
  Params r = *this;
  if (rho_nonbacklogged <= 0.0) return r;
  const double keep = 1.0 - rho_nonbacklogged;
  if (keep <= 0.0) throw SimError("non-backlogged load saturates the channel");
  r.capacity_bps = capacity_bps * keep;
  r.rho = (rho - rho_nonbacklogged) / keep;
  for (auto& ri : r.rho_i) ri = rho > 0.0 ? ri / rho * r.rho : 0.0;  // keep shares
  r.rho_nonbacklogged = 0.0;
  return r;
}

double stationary_joint(std::span<const int> n, const Params& p) {
  require_stationary(p);
  if (n.size() != p.rho_i.size()) throw SimError("count vector size != sources");
  int m = 0;
  double log_prod = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0) throw SimError("negative flow count");
    if (n[i] == 0) continue;
    if (p.rho_i[i] <= 0.0) return 0.0;
    m += n[i];
    log_prod += n[i] * std::log(p.rho_i[i]) - std::lgamma(n[i] + 1.0);
  }
  return std::exp(log_falling(m, p.x) + log_prod + (1.0 + p.x) * std::log1p(-p.rho));
}

double stationary_total(int m, const Params& p) {
  require_stationary(p);
  if (m < 0) return 0.0;
  if (p.rho <= 0.0) return m == 0 ? 1.0 : 0.0;
  double lp = log_falling(m, p.x) + m * std::log(p.rho) - std::lgamma(m + 1.0) +
              (1.0 + p.x) * std::log1p(-p.rho);
  return std::exp(lp);
}

double stationary_marginal(int n_i, double rho_i, const Params& p) {
  require_stationary(p);
  if (n_i < 0) return 0.0;
  const double rho_t = rho_i / (1.0 - p.rho + rho_i);
  if (rho_t <= 0.0) return n_i == 0 ? 1.0 : 0.0;
  double lp = log_falling(n_i, p.x) + n_i * std::log(rho_t) - std::lgamma(n_i + 1.0) +
              (1.0 + p.x) * std::log1p(-rho_t);
  return std::exp(lp);
}

double mean_flows_per_source(double rho_i, const Params& p) {
  require_stationary(p);
  return rho_i * (1.0 + p.x) / (1.0 - p.rho);
}

double mean_flows_total(const Params& p) { return mean_flows_per_source(p.rho, p); }

double flow_throughput_bps(const Params& p) {
  const Params r = p.reduced();
  if (!(r.rho < 1.0)) throw SimError("effective load >= 1, throughput undefined");
  return (1.0 - r.rho) * r.capacity_bps / (1.0 + r.x);
}

double grant_overlap_pmf(int n, int nodes, double rho_prime, bool poisson_limit) {
  if (n < 0) return 0.0;
  if (!poisson_limit) {
    if (nodes < 2) throw SimError("overlap distribution needs nodes >= 2");
    if (rho_prime < 0.0 || rho_prime > nodes - 1)
      throw SimError("rho' outside [0, nodes-1]");
    if (n > nodes - 1) return 0.0;
    return std::exp(binom_log_pmf(n, nodes - 1, rho_prime / (nodes - 1)));
  }
  if (rho_prime < 0.0) throw SimError("rho' must be nonnegative");
  return std::exp(poisson_log_pmf(n, rho_prime));
}

double blocking_fraction(int t, int nodes, double rho_prime, bool poisson_limit) {
  if (t < 1) throw SimError("blocking fraction needs t >= 1");
  if (rho_prime == 0.0) return 0.0;
  if (!poisson_limit && t >= nodes - 1) return 0.0;  // overlap can never exceed R-1
  const double excess = mean_excess(t, nodes, rho_prime, poisson_limit);
  return excess > 0.0 ? excess / rho_prime : 0.0;
}

MaxLoad max_load(int t, int nodes, bool poisson_limit) {
  if (t < 1 || nodes < 2) throw SimError("max_load needs t >= 1, nodes >= 2");
  const double rho_prime = 1.0;  // min(t, 1); a tree never offers more than its capacity
  MaxLoad out;
  out.blocking = blocking_fraction(t, nodes, rho_prime, poisson_limit);
  out.rho_star = rho_prime * (1.0 - out.blocking);
  return out;
}

double throughput_with_blocking(double rho, const Params& p, double b_t) {
  const double limit = 1.0 - b_t;
  if (rho >= limit) return 0.0;
  return (1.0 - rho / limit) * p.capacity_bps / (1.0 + p.x);
}

TimeSpan expected_cycle_time(int sources, TimeSpan delta_r, double rho) {
  if (!(rho < 1.0)) throw SimError("cycle time requires rho < 1");
  return std::llround(static_cast<double>(sources) * static_cast<double>(delta_r) /
                      (1.0 - rho));
}

std::optional<double> effective_intensity(int t, int nodes, double rho, bool poisson_limit) {
  if (rho <= 0.0) return 0.0;
  double rp = rho;
  for (int iter = 0; iter < 500; ++iter) {
    const double b = blocking_fraction(t, nodes, rp, poisson_limit);
    if (b >= 1.0) return std::nullopt;
    const double next = rho / (1.0 - b);
    if (next > t) return std::nullopt;  // t transmitters saturated
    if (std::abs(next - rp) < 1e-13) return next;
    rp = next;
  }
  return rp;
}

}  // namespace twin::analytics

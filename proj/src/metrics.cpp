#include "twin/metrics.hpp"

#include <cmath>

namespace twin {
namespace {

// Two-sided 95% Student-t quantiles for small n; 1.96 beyond the table.
double t_quantile(int df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                 2.306,  2.262, 2.228, 2.201, 2.179, 2.160, 2.145,
                                 2.131,  2.120, 2.110, 2.101, 2.093, 2.086, 2.080,
                                 2.074,  2.069, 2.064, 2.060, 2.056, 2.052, 2.048,
                                 2.045,  2.042};
  if (df < 1) return 0.0;
  if (df <= 30) return table[df - 1];
  return 1.96;
}

}  // namespace

Estimate estimate(const std::vector<double>& samples) {
  Estimate e;
  e.n = static_cast<int>(samples.size());
  if (e.n == 0) return e;
  double sum = 0.0;
  for (double s : samples) sum += s;
  e.mean = sum / e.n;
  if (e.n < 2) return e;
  double ss = 0.0;
  for (double s : samples) ss += (s - e.mean) * (s - e.mean);
  const double var = ss / (e.n - 1);
  e.ci95 = t_quantile(e.n - 1) * std::sqrt(var / e.n);
  return e;
}

}  // namespace twin

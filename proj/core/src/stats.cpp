#include "nsplan/stats.hpp"

#include <cmath>
#include <numeric>

#include "nsplan/error.hpp"

namespace nsplan {

std::pair<double, double> wilson_ci(long successes, long trials, double z) {
  if (trials < 1 || successes < 0 || successes > trials) {
    throw DomainError("wilson_ci needs 0 <= successes <= trials and trials >= 1");
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("z must be positive");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

std::pair<double, double> mean_and_ss(const std::vector<double>& xs) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss};
}

}  // namespace

double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("cohens_d needs at least two values per sample");
  const auto [ma, ssa] = mean_and_ss(a);
  const auto [mb, ssb] = mean_and_ss(b);
  const double pooled = std::sqrt((ssa + ssb) / static_cast<double>(a.size() + b.size() - 2));
  if (pooled == 0.0) throw DomainError("pooled standard deviation is zero; effect size undefined");
  return (ma - mb) / pooled;
}

}  // namespace nsplan

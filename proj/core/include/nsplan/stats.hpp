#pragma once

#include <utility>
#include <vector>

namespace nsplan {

/// Wilson score interval for successes / trials. Throws DomainError unless
/// 0 <= successes <= trials, trials >= 1 and z > 0.
std::pair<double, double> wilson_ci(long successes, long trials, double z = 1.96);

/// (mean_a - mean_b) / pooled sd, pooled with n-1 denominators. Throws
/// DomainError for samples smaller than two and when the pooled sd is zero.
double cohens_d(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace nsplan

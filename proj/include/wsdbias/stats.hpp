#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace wsdbias {

struct RbcResult {
  double f = 0;    // fraction of cross pairs with err > ok
  double u = 0;    // fraction with err < ok; ties count toward neither
  double rbc = 0;  // f - u
};

struct MwuResult {
  double u_stat = 0;  // min(U1, U2)
  double u1 = 0, u2 = 0;
  double r1 = 0, r2 = 0;  // rank sums
  std::size_t n1 = 0, n2 = 0;
  double z = 0;
  double p_two_sided = 1;
};

struct EffectThresholds {
  std::array<double, 3> d_values{0.2, 0.5, 0.8};
  double p1 = 0;
  std::array<double, 3> thresholds{};  // small, medium, large
};

// Rank-biserial correlation over all n1*n2 cross-group comparisons.
// Counting is exact (integer comparisons), so the result matches a
// brute-force pairwise enumeration bit for bit.
RbcResult rank_biserial(const std::vector<double>& err_scores,
                        const std::vector<double>& ok_scores);

// Mann-Whitney U with average ranks for ties, tie-corrected sigma and
// two-sided normal approximation (no continuity correction by default).
// Throws Error when a group is empty, n1+n2 < 3, or all pooled values are
// identical (sigma == 0).
MwuResult mann_whitney_u(const std::vector<double>& err_scores,
                         const std::vector<double>& ok_scores,
                         bool continuity_correction = false);

// Cohen benchmarks 0.2/0.5/0.8 converted for a dichotomous base rate p1:
// threshold(d) = d / sqrt(d^2 + 1/(p1*p2)) with p2 = 1 - p1.
EffectThresholds adjusted_effect_thresholds(double p1);

// Standard normal CDF via erfc; absolute error well below 1e-10.
double normal_cdf(double z);

}  // namespace wsdbias

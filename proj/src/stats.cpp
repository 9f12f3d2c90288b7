#include "wsdbias/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "wsdbias/error.hpp"

namespace wsdbias {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

RbcResult rank_biserial(const std::vector<double>& err_scores,
                        const std::vector<double>& ok_scores) {
  if (err_scores.empty() || ok_scores.empty())
    fail("rank_biserial: both groups must be non-empty");

  std::vector<double> ok_sorted = ok_scores;
  std::sort(ok_sorted.begin(), ok_sorted.end());

  int64_t greater = 0, less = 0;
  for (double e : err_scores) {
    auto lo = std::lower_bound(ok_sorted.begin(), ok_sorted.end(), e);
    auto hi = std::upper_bound(lo, ok_sorted.end(), e);
    greater += lo - ok_sorted.begin();       // ok values strictly below e
    less += ok_sorted.end() - hi;            // ok values strictly above e
  }
  double total = static_cast<double>(err_scores.size()) *
                 static_cast<double>(ok_scores.size());
  RbcResult r;
  r.f = static_cast<double>(greater) / total;
  r.u = static_cast<double>(less) / total;
  r.rbc = r.f - r.u;
  return r;
}

MwuResult mann_whitney_u(const std::vector<double>& err_scores,
                         const std::vector<double>& ok_scores,
                         bool continuity_correction) {
  std::size_t n1 = err_scores.size(), n2 = ok_scores.size();
  if (n1 == 0 || n2 == 0) fail("mann_whitney_u: both groups must be non-empty");
  if (n1 + n2 < 3) fail("mann_whitney_u: need at least 3 pooled observations");

  struct Obs {
    double value;
    int group;  // 0 = err, 1 = ok
  };
  std::vector<Obs> pooled;
  pooled.reserve(n1 + n2);
  for (double v : err_scores) pooled.push_back({v, 0});
  for (double v : ok_scores) pooled.push_back({v, 1});
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Obs& a, const Obs& b) { return a.value < b.value; });

  double n = static_cast<double>(n1 + n2);
  double r1 = 0, r2 = 0, tie_sum = 0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    double t = static_cast<double>(j - i);
    if (j - i > 1) tie_sum += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].group == 0)
        r1 += avg_rank;
      else
        r2 += avg_rank;
    }
    i = j;
  }

  MwuResult res;
  res.n1 = n1;
  res.n2 = n2;
  res.r1 = r1;
  res.r2 = r2;
  double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  res.u1 = r1 - dn1 * (dn1 + 1.0) / 2.0;
  res.u2 = r2 - dn2 * (dn2 + 1.0) / 2.0;
  res.u_stat = std::min(res.u1, res.u2);

  double sigma_sq =
      (dn1 * dn2 / 12.0) * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
  if (sigma_sq <= 0)
    fail("mann_whitney_u: degenerate input (all pooled values identical)");
  double sigma = std::sqrt(sigma_sq);

  double diff = res.u_stat - dn1 * dn2 / 2.0;
  if (continuity_correction) {
    if (diff > 0.5)
      diff -= 0.5;
    else if (diff < -0.5)
      diff += 0.5;
    else
      diff = 0.0;
  }
  res.z = diff / sigma;
  double p = 2.0 * normal_cdf(-std::fabs(res.z));
  res.p_two_sided = std::min(1.0, std::max(0.0, p));
  return res;
}

EffectThresholds adjusted_effect_thresholds(double p1) {
  if (!(p1 > 0.0 && p1 < 1.0))
    fail("adjusted_effect_thresholds: base rate must lie strictly in (0,1)");
  EffectThresholds t;
  t.p1 = p1;
  double p2 = 1.0 - p1;
  for (std::size_t i = 0; i < t.d_values.size(); ++i) {
    double d = t.d_values[i];
    t.thresholds[i] = d / std::sqrt(d * d + 1.0 / (p1 * p2));
  }
  return t;
}

}  // namespace wsdbias

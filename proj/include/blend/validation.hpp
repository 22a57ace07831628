#pragma once

// Statistical validation: exact binomial tail evaluation, normal quantiles,
// the posterior feasibility certificate on a fresh check sample, and the
// order-statistic lower bound from independent solution replications.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "blend/centralized.hpp"
#include "blend/model.hpp"
#include "blend/sampling.hpp"

namespace blend {

// B(k; p, n) = P(Binomial(n, p) <= k), evaluated term by term in the log
// domain so small tails keep full relative precision.
inline double binomial_cdf(std::size_t k, double p, std::size_t n) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must be in [0,1]");
  if (k >= n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  double lp = std::log(p);
  double lq = std::log1p(-p);
  double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  double sum = 0.0;
  for (std::size_t j = 0; j <= k; ++j) {
    double lj = static_cast<double>(j);
    double lterm = lgn - std::lgamma(lj + 1.0) -
                   std::lgamma(static_cast<double>(n - j) + 1.0) + lj * lp +
                   static_cast<double>(n - j) * lq;
    sum += std::exp(lterm);
  }
  return std::min(sum, 1.0);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// Inverse standard normal CDF: rational initial guess refined by two Newton
// steps against erfc, good to well under 1e-12 over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("quantile requires p in (0,1)");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    double err = normal_cdf(x) - p;
    double dens = normal_pdf(x);
    if (dens <= 0.0) break;
    x -= err / dens;
  }
  return x;
}

struct FeasibilityCertificate {
  std::size_t sample_size = 0;
  std::size_t ash_violations = 0;
  std::size_t heat_violations = 0;
  double ash_rate = 0.0;
  double heat_rate = 0.0;
  double ash_upper = 0.0;   // one-sided posterior upper confidence bound
  double heat_upper = 0.0;
  double delta = 0.0;
  bool ash_ok = false;
  bool heat_ok = false;
};

// Checks a candidate blend on a fresh sample drawn from the validation
// stream, which never overlaps the optimization stream for any seed. The
// upper bound is p_hat + z_{1-delta} * sqrt(p_hat (1 - p_hat) / n).
inline FeasibilityCertificate posterior_feasibility(
    const ProblemInstance& instance,
    const std::vector<std::vector<double>>& quantity, std::size_t n_check,
    std::uint64_t seed, double delta) {
  if (delta <= 0.0 || delta >= 1.0) {
    throw std::invalid_argument("delta must be in (0,1)");
  }
  ScenarioSet check = sample_scenarios(instance, n_check, seed,
                                       SampleStream::kValidation);
  std::size_t c1 = 0, c2 = 0;
  double alpha = instance.refinery.ash_limit;
  double tau = instance.refinery.thermal_requirement;
  for (std::size_t s = 0; s < check.count; ++s) {
    double ash = 0.0, heat = 0.0;
    for (std::size_t i = 0; i < instance.num_suppliers(); ++i) {
      for (std::size_t b = 0; b < instance.num_biomass(); ++b) {
        ash += (check.ash_at(s, i, b) - alpha) * quantity[i][b];
        heat += instance.biomass[b].efficiency * check.heat_at(s, i, b) *
                quantity[i][b];
      }
    }
    if (ash > 0.0) ++c1;
    if (tau - heat > 0.0) ++c2;
  }
  FeasibilityCertificate cert;
  cert.sample_size = n_check;
  cert.ash_violations = c1;
  cert.heat_violations = c2;
  cert.ash_rate = static_cast<double>(c1) / static_cast<double>(n_check);
  cert.heat_rate = static_cast<double>(c2) / static_cast<double>(n_check);
  cert.delta = delta;
  double z = normal_quantile(1.0 - delta);
  auto upper = [&](double phat) {
    return phat +
           z * std::sqrt(phat * (1.0 - phat) / static_cast<double>(n_check));
  };
  cert.ash_upper = upper(cert.ash_rate);
  cert.heat_upper = upper(cert.heat_rate);
  cert.ash_ok = cert.ash_upper <= instance.refinery.risk_ash;
  cert.heat_ok = cert.heat_upper <= instance.refinery.risk_thermal;
  return cert;
}

struct LowerBoundReport {
  double pi_ash = 0.0;
  double pi_heat = 0.0;
  std::size_t order_index = 0;  // T; 0 means no valid order statistic exists
  bool defined = false;
  std::vector<double> replication_values;  // sorted ascending
  double bound = -std::numeric_limits<double>::infinity();
  std::size_t sample_size = 0;
  std::size_t replications = 0;
  double delta = 0.0;
};

// Order-statistic lower bound on the chance-constrained optimum. Each
// replication solves the sampled problem on a fresh validation-stream draw
// and records a certified lower bound of its optimum; per-replication
// success probability is pi = B(floor(N * inner_risk); outer_risk, N), and
// T is the largest order index whose failure mass B(T-1; pi, M) stays
// within delta. Both constraints share the sample, so the conservative
// T = min(T_ash, T_heat) is used.
inline LowerBoundReport saa_lower_bound(const ProblemInstance& instance,
                                        std::size_t n, std::size_t m,
                                        std::uint64_t seed, double delta) {
  if (n == 0 || m == 0) {
    throw std::invalid_argument("sample size and replications must be >= 1");
  }
  if (delta <= 0.0 || delta >= 1.0) {
    throw std::invalid_argument("delta must be in (0,1)");
  }
  const RefinerySpec& r = instance.refinery;
  LowerBoundReport rep;
  rep.sample_size = n;
  rep.replications = m;
  rep.delta = delta;
  rep.pi_ash = binomial_cdf(
      static_cast<std::size_t>(std::floor(r.inner_risk_ash * n + 1e-9)),
      r.risk_ash, n);
  rep.pi_heat = binomial_cdf(
      static_cast<std::size_t>(std::floor(r.inner_risk_thermal * n + 1e-9)),
      r.risk_thermal, n);
  auto largest_t = [&](double pi) {
    std::size_t t = 0;
    for (std::size_t cand = 1; cand <= m; ++cand) {
      if (binomial_cdf(cand - 1, pi, m) <= delta) t = cand;
    }
    return t;
  };
  rep.order_index = std::min(largest_t(rep.pi_ash), largest_t(rep.pi_heat));
  if (rep.order_index == 0) return rep;

  bool hard = r.inner_risk_ash == 0.0 && r.inner_risk_thermal == 0.0;
  for (std::size_t rep_idx = 0; rep_idx < m; ++rep_idx) {
    std::uint64_t rep_seed = rng::mix(seed + (rep_idx + 1) * rng::kGamma);
    ScenarioSet draw =
        sample_scenarios(instance, n, rep_seed, SampleStream::kValidation);
    double value;
    if (hard) {
      // Zero inner risk: the sampled problem enforces every scenario, so a
      // single hard-slack outer LP certifies its lower bound.
      OuterModel outer = build_outer_model(instance, draw, 1.0, 1.0, true);
      LpSolution sol = solve_lp(outer.lp);
      if (sol.status != LpStatus::kOptimal) {
        throw std::runtime_error("replication LP infeasible");
      }
      value = sol.objective;
    } else {
      value = saa_binary_search(instance, draw).result.lower_bound;
    }
    rep.replication_values.push_back(value);
  }
  std::sort(rep.replication_values.begin(), rep.replication_values.end());
  rep.bound = rep.replication_values[rep.order_index - 1];
  rep.defined = true;
  return rep;
}

}  // namespace blend

#pragma once

// Centralized SAA machinery: the convex outer model, the fixed-penalty solve
// with its upper/lower bounds (the lift construction and the bracket-gap
// identity), and the penalty binary search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "blend/bnb.hpp"
#include "blend/lp.hpp"
#include "blend/model.hpp"
#include "blend/sampling.hpp"

namespace blend {

struct PenaltyWeights {
  double lambda = 0.0;  // $ per unit ash-violation mass
  double mu = 0.0;      // $ per unit thermal shortfall
  double lambda_lo = 0.0, lambda_hi = 0.0;
  double mu_lo = 0.0, mu_hi = 0.0;
  double count_slack = 0.0;   // epsilon
  double width_stop = 1e-4;   // delta
};

struct CentralizedResult {
  BlendSolution solution;
  double upper_bound = 0.0;  // penalized objective at the lifted plan
  double lower_bound = 0.0;  // LP optimum of the outer model
  double outer_value = 0.0;  // outer-model objective at the lifted plan
  double error_gap = 0.0;    // (UB - LB) / UB
  double delta_identity = 0.0;  // sum of active bracket gaps
  double delta_max = 0.0;       // sum over (i,b) of the worst bracket gap
  PenaltyWeights penalties;
  std::size_t ash_violations = 0;    // C1
  std::size_t heat_violations = 0;   // C2
};

// Variable/row bookkeeping for the outer model (one X and one F per (i,b),
// four slacks per scenario).
struct OuterModel {
  LinearProgram lp;
  std::size_t num_suppliers = 0, num_biomass = 0, num_scenarios = 0;

  std::size_t x(std::size_t i, std::size_t b) const {
    return (i * num_biomass + b) * 2;
  }
  std::size_t f(std::size_t i, std::size_t b) const {
    return (i * num_biomass + b) * 2 + 1;
  }
  std::size_t slack_base() const { return 2 * num_suppliers * num_biomass; }
  std::size_t v(std::size_t s) const { return slack_base() + 4 * s; }
  std::size_t w(std::size_t s) const { return slack_base() + 4 * s + 1; }
  std::size_t u(std::size_t s) const { return slack_base() + 4 * s + 2; }
  std::size_t j(std::size_t s) const { return slack_base() + 4 * s + 3; }
  std::size_t ash_row(std::size_t s) const { return s; }
  std::size_t heat_row(std::size_t s) const { return num_scenarios + s; }
};

// Builds the outer approximation LP: objective sum F + (t+f)X + penalties,
// one ash and one thermal row per scenario, one epigraph row per (i,b,p),
// one availability row per (i,b). hard_slacks pins W and J to zero, turning
// both chance rows into hard constraints.
inline OuterModel build_outer_model(const ProblemInstance& instance,
                                    const ScenarioSet& scenarios,
                                    double lambda, double mu,
                                    bool hard_slacks = false) {
  if (scenarios.count == 0) throw std::invalid_argument("no scenarios");
  OuterModel m;
  m.num_suppliers = instance.num_suppliers();
  m.num_biomass = instance.num_biomass();
  m.num_scenarios = scenarios.count;
  LinearProgram& lp = m.lp;

  for (std::size_t i = 0; i < m.num_suppliers; ++i) {
    for (std::size_t b = 0; b < m.num_biomass; ++b) {
      double t = unit_transport_cost(instance, i, b);
      double fb = instance.biomass[b].processing_storage;
      lp.add_variable(0.0, kInf, t + fb);  // X_ib
      lp.add_variable(0.0, kInf, 1.0);     // F_ib
    }
  }
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    lp.add_variable(0.0, kInf, 0.0);                          // V_s
    lp.add_variable(0.0, hard_slacks ? 0.0 : kInf, lambda);   // W_s
    lp.add_variable(0.0, kInf, 0.0);                          // U_s
    lp.add_variable(0.0, hard_slacks ? 0.0 : kInf, mu);       // J_s
  }

  double alpha = instance.refinery.ash_limit;
  double tau = instance.refinery.thermal_requirement;
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    std::vector<double> row(lp.num_vars(), 0.0);
    for (std::size_t i = 0; i < m.num_suppliers; ++i) {
      for (std::size_t b = 0; b < m.num_biomass; ++b) {
        row[m.x(i, b)] = scenarios.ash_at(s, i, b) - alpha;
      }
    }
    row[m.v(s)] = 1.0;
    row[m.w(s)] = -1.0;
    lp.add_row(std::move(row), RowSense::kEqual, 0.0);
  }
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    std::vector<double> row(lp.num_vars(), 0.0);
    for (std::size_t i = 0; i < m.num_suppliers; ++i) {
      for (std::size_t b = 0; b < m.num_biomass; ++b) {
        row[m.x(i, b)] = -instance.biomass[b].efficiency *
                         scenarios.heat_at(s, i, b);
      }
    }
    row[m.u(s)] = 1.0;
    row[m.j(s)] = -1.0;
    lp.add_row(std::move(row), RowSense::kEqual, -tau);
  }
  for (std::size_t i = 0; i < m.num_suppliers; ++i) {
    for (std::size_t b = 0; b < m.num_biomass; ++b) {
      const SupplyCurve& curve = instance.curve(i, b);
      for (std::size_t p = 0; p < curve.size(); ++p) {
        const Bracket& br = curve.bracket(p);
        std::vector<double> row(lp.num_vars(), 0.0);
        row[m.f(i, b)] = 1.0;
        row[m.x(i, b)] = -br.price;
        lp.add_row(std::move(row), RowSense::kGreaterEq,
                   curve.cumulative_below(p) - br.price * br.lower);
      }
      std::vector<double> avail(lp.num_vars(), 0.0);
      avail[m.x(i, b)] = 1.0;
      lp.add_row(std::move(avail), RowSense::kLessEq, curve.availability());
    }
  }
  return m;
}

namespace detail {

// Positive-slack detection: LP tolerance noise on a row of activity
// magnitude `mag` must not count as a violation.
inline bool positive_slack(double value, double mag) {
  return value > 1e-6 * std::max(1.0, mag);
}

}  // namespace detail

inline CentralizedResult solve_centralized_fixed_penalty(
    const ProblemInstance& instance, const ScenarioSet& scenarios,
    double lambda, double mu, bool hard_slacks = false) {
  OuterModel m = build_outer_model(instance, scenarios, lambda, mu,
                                   hard_slacks);
  LpSolution sol = solve_lp(m.lp);
  if (sol.status == LpStatus::kInfeasible) {
    if (!hard_slacks) {
      throw std::runtime_error("outer model infeasible with slacks present");
    }
    throw std::runtime_error("hard-constrained outer model infeasible");
  }
  if (sol.status != LpStatus::kOptimal) {
    throw std::runtime_error("outer model: solver failure");
  }

  CentralizedResult res;
  res.penalties.lambda = lambda;
  res.penalties.mu = mu;
  std::size_t nI = m.num_suppliers, nB = m.num_biomass;
  BlendSolution& plan = res.solution;
  plan.quantity.assign(nI, std::vector<std::vector<double>>(nB));
  plan.chosen_bracket.assign(nI, std::vector<std::size_t>(nB, 0));

  double purchase = 0.0, transport = 0.0, processing = 0.0;
  double delta = 0.0, delta_max = 0.0;
  for (std::size_t i = 0; i < nI; ++i) {
    for (std::size_t b = 0; b < nB; ++b) {
      const SupplyCurve& curve = instance.curve(i, b);
      double x = std::clamp(sol.x[m.x(i, b)], 0.0, curve.availability());
      // Lift to the bracketed plan: the bracket containing x carries the
      // whole quantity. Outer-model vertices often sit exactly on bracket
      // boundaries; snap solver dust down so the cheaper bracket applies.
      std::size_t p = curve.bracket_of(x);
      if (p > 0 && x - curve.bracket(p).lower <=
                       1e-6 * (1.0 + curve.availability())) {
        x = curve.bracket(p).lower;
        --p;
      }
      plan.quantity[i][b].assign(curve.size(), 0.0);
      plan.quantity[i][b][p] = x;
      plan.chosen_bracket[i][b] = p;
      purchase += purchase_cost(curve, x);
      transport += unit_transport_cost(instance, i, b) * x;
      processing += instance.biomass[b].processing_storage * x;
      if (x > 0.0) delta += bracket_gap(curve, p);
      double worst = 0.0;
      for (std::size_t q = 0; q < curve.size(); ++q) {
        worst = std::max(worst, bracket_gap(curve, q));
      }
      delta_max += worst;
    }
  }

  // Slacks recomputed from the lifted plan itself, so violation counts and
  // the penalty term describe the returned plan, not the raw LP iterate.
  plan.ash_slack_neg.resize(scenarios.count);
  plan.ash_slack_pos.resize(scenarios.count);
  plan.heat_slack_neg.resize(scenarios.count);
  plan.heat_slack_pos.resize(scenarios.count);
  double penalty = 0.0;
  double tau = instance.refinery.thermal_requirement;
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    double ash_act = 0.0, ash_mag = 0.0, heat_act = 0.0;
    for (std::size_t i = 0; i < nI; ++i) {
      for (std::size_t b = 0; b < nB; ++b) {
        double x = plan.total_quantity(i, b);
        double excess = scenarios.ash_at(s, i, b) - instance.refinery.ash_limit;
        ash_act += excess * x;
        ash_mag += std::abs(excess) * x;
        heat_act += instance.biomass[b].efficiency *
                    scenarios.heat_at(s, i, b) * x;
      }
    }
    plan.ash_slack_neg[s] = std::max(0.0, -ash_act);
    plan.ash_slack_pos[s] = std::max(0.0, ash_act);
    plan.heat_slack_neg[s] = std::max(0.0, heat_act - tau);
    plan.heat_slack_pos[s] = std::max(0.0, tau - heat_act);
    penalty += lambda * plan.ash_slack_pos[s] + mu * plan.heat_slack_pos[s];
    if (detail::positive_slack(plan.ash_slack_pos[s], ash_mag)) {
      ++res.ash_violations;
    }
    if (detail::positive_slack(plan.heat_slack_pos[s], tau)) {
      ++res.heat_violations;
    }
  }

  plan.costs = {purchase, transport, processing, penalty};
  plan.objective = plan.costs.total();
  res.upper_bound = plan.objective;
  // Outer objective of the lifted plan differs from the upper bound by
  // exactly the sum of active bracket gaps; the LP optimum is the certified
  // lower bound.
  double outer_value = transport + processing + penalty;
  for (std::size_t i = 0; i < nI; ++i) {
    for (std::size_t b = 0; b < nB; ++b) {
      outer_value += outer_cost(instance.curve(i, b),
                                plan.total_quantity(i, b));
    }
  }
  res.outer_value = outer_value;
  res.lower_bound = std::min(sol.objective, outer_value);
  res.delta_identity = delta;
  res.delta_max = delta_max;
  res.error_gap = res.upper_bound > 0.0
                      ? (res.upper_bound - res.lower_bound) / res.upper_bound
                      : 0.0;
  return res;
}

struct SearchTracePoint {
  double lambda = 0.0;
  double mu = 0.0;
  std::size_t ash_violations = 0;
  std::size_t heat_violations = 0;
  double upper_bound = 0.0;
};

struct SearchResult {
  CentralizedResult result;
  std::vector<SearchTracePoint> trace;
};

// Appendix-style binary search for (lambda, mu). Both penalties are halved
// jointly each iteration; the incumbent is the latest solve whose violation
// counts meet the ceiling targets. The initial upper bounds are validated
// and doubled (up to a cap) until the counts are satisfiable there.
template <typename Inner>
SearchResult saa_binary_search_with(const ProblemInstance& instance,
                                    const ScenarioSet& scenarios,
                                    double beta_hat, double gamma_hat,
                                    PenaltyWeights bounds, Inner&& inner) {
  std::size_t n = scenarios.count;
  double c1_target = std::floor(beta_hat * static_cast<double>(n) + 1e-9) +
                     bounds.count_slack;
  double c2_target = std::floor(gamma_hat * static_cast<double>(n) + 1e-9) +
                     bounds.count_slack;

  auto counts_ok = [&](const CentralizedResult& r) {
    return static_cast<double>(r.ash_violations) <= c1_target &&
           static_cast<double>(r.heat_violations) <= c2_target;
  };

  // Bound-expansion loop.
  int doublings = 0;
  CentralizedResult at_hi;
  for (;;) {
    at_hi = inner(instance, scenarios, bounds.lambda_hi, bounds.mu_hi);
    if (counts_ok(at_hi)) break;
    if (++doublings > 40) {
      throw std::runtime_error(
          "penalty search failure: counts not satisfiable at cap; C1=" +
          std::to_string(at_hi.ash_violations) +
          " C2=" + std::to_string(at_hi.heat_violations));
    }
    if (static_cast<double>(at_hi.ash_violations) > c1_target) {
      bounds.lambda_hi *= 2.0;
    }
    if (static_cast<double>(at_hi.heat_violations) > c2_target) {
      bounds.mu_hi *= 2.0;
    }
  }

  double delta_l = bounds.width_stop * bounds.lambda_hi;
  double delta_m = bounds.width_stop * bounds.mu_hi;
  double ll = bounds.lambda_lo, lu = bounds.lambda_hi;
  double ml = bounds.mu_lo, mu_u = bounds.mu_hi;

  SearchResult out;
  out.result = at_hi;
  out.result.penalties = bounds;
  out.result.penalties.lambda = bounds.lambda_hi;
  out.result.penalties.mu = bounds.mu_hi;
  bool trivially_satisfied = c1_target >= static_cast<double>(n) &&
                             c2_target >= static_cast<double>(n);
  for (;;) {
    double lam = 0.5 * (ll + lu);
    double muv = 0.5 * (ml + mu_u);
    CentralizedResult r = inner(instance, scenarios, lam, muv);
    out.trace.push_back({lam, muv, r.ash_violations, r.heat_violations,
                         r.upper_bound});
    if (counts_ok(r)) {
      out.result = r;
      out.result.penalties = bounds;
      out.result.penalties.lambda = lam;
      out.result.penalties.mu = muv;
      if (trivially_satisfied) break;  // any midpoint is acceptable
    }
    if (static_cast<double>(r.ash_violations) > c1_target) {
      ll = lam;
    } else {
      lu = lam;
    }
    if (static_cast<double>(r.heat_violations) > c2_target) {
      ml = muv;
    } else {
      mu_u = muv;
    }
    if (std::abs(lam - 0.5 * (ll + lu)) <= delta_l &&
        std::abs(muv - 0.5 * (ml + mu_u)) <= delta_m) {
      break;
    }
  }
  return out;
}

// Default penalty upper bound: a deliberate overestimate of total system
// cost, ten times the worst unit delivered cost scaled by the tonnage needed
// to meet tau at the lowest heating value.
inline double default_penalty_upper_bound(const ProblemInstance& instance) {
  double worst_unit = 0.0;
  double min_lhv = kInf;
  for (std::size_t b = 0; b < instance.num_biomass(); ++b) {
    min_lhv = std::min(min_lhv, instance.biomass[b].heat_dist.low);
  }
  for (std::size_t i = 0; i < instance.num_suppliers(); ++i) {
    for (std::size_t b = 0; b < instance.num_biomass(); ++b) {
      double t = unit_transport_cost(instance, i, b);
      double fb = instance.biomass[b].processing_storage;
      const SupplyCurve& curve = instance.curve(i, b);
      for (std::size_t p = 0; p < curve.size(); ++p) {
        worst_unit = std::max(worst_unit, curve.bracket(p).price + t + fb);
      }
    }
  }
  double tons = instance.refinery.thermal_requirement / min_lhv;
  return std::max(1.0, 10.0 * worst_unit * tons);
}

inline PenaltyWeights default_penalty_bounds(const ProblemInstance& instance) {
  PenaltyWeights w;
  w.lambda_lo = w.mu_lo = 0.0;
  w.lambda_hi = w.mu_hi = default_penalty_upper_bound(instance);
  w.count_slack = 0.0;
  w.width_stop = 1e-4;
  return w;
}

inline SearchResult saa_binary_search(const ProblemInstance& instance,
                                      const ScenarioSet& scenarios,
                                      double beta_hat, double gamma_hat,
                                      const PenaltyWeights& bounds) {
  return saa_binary_search_with(
      instance, scenarios, beta_hat, gamma_hat, bounds,
      [](const ProblemInstance& inst, const ScenarioSet& sc, double lam,
         double mu) {
        return solve_centralized_fixed_penalty(inst, sc, lam, mu);
      });
}

// Convenience overload: inner risks from the instance, default bounds.
inline SearchResult saa_binary_search(const ProblemInstance& instance,
                                      const ScenarioSet& scenarios) {
  return saa_binary_search(instance, scenarios,
                           instance.refinery.inner_risk_ash,
                           instance.refinery.inner_risk_thermal,
                           default_penalty_bounds(instance));
}

// Exact (P-bar) oracle: the SAA MIP with binary bracket indicators, solved
// by branch-and-bound. Desk-scale instances only.
inline BracketMip build_centralized_mip(const ProblemInstance& instance,
                                        const ScenarioSet& scenarios,
                                        double lambda, double mu) {
  BracketMip mip;
  LinearProgram& lp = mip.lp;
  std::size_t nI = instance.num_suppliers();
  std::size_t nB = instance.num_biomass();

  std::vector<std::vector<std::vector<std::size_t>>> xv(
      nI, std::vector<std::vector<std::size_t>>(nB));
  for (std::size_t i = 0; i < nI; ++i) {
    for (std::size_t b = 0; b < nB; ++b) {
      const SupplyCurve& curve = instance.curve(i, b);
      double t = unit_transport_cost(instance, i, b);
      double fb = instance.biomass[b].processing_storage;
      BracketGroup g;
      for (std::size_t p = 0; p < curve.size(); ++p) {
        const Bracket& br = curve.bracket(p);
        std::size_t x = lp.add_variable(0.0, br.upper, br.price + t + fb);
        std::size_t z = lp.add_variable(0.0, 1.0, 0.0);
        g.x_vars.push_back(x);
        g.z_vars.push_back(z);
        xv[i][b].push_back(x);
      }
      mip.groups.push_back(std::move(g));
    }
  }
  std::vector<std::size_t> wv(scenarios.count), jv(scenarios.count),
      vv(scenarios.count), uv(scenarios.count);
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    vv[s] = lp.add_variable(0.0, kInf, 0.0);
    wv[s] = lp.add_variable(0.0, kInf, lambda);
    uv[s] = lp.add_variable(0.0, kInf, 0.0);
    jv[s] = lp.add_variable(0.0, kInf, mu);
  }

  // Linking rows and the one-bracket row per group.
  for (std::size_t gidx = 0; gidx < mip.groups.size(); ++gidx) {
    const BracketGroup& g = mip.groups[gidx];
    std::size_t i = gidx / nB, b = gidx % nB;
    const SupplyCurve& curve = instance.curve(i, b);
    std::vector<double> sum_z(lp.num_vars(), 0.0);
    for (std::size_t p = 0; p < g.x_vars.size(); ++p) {
      const Bracket& br = curve.bracket(p);
      std::vector<double> lo_row(lp.num_vars(), 0.0);
      lo_row[g.x_vars[p]] = -1.0;
      lo_row[g.z_vars[p]] = br.lower;
      lp.add_row(std::move(lo_row), RowSense::kLessEq, 0.0);
      std::vector<double> hi_row(lp.num_vars(), 0.0);
      hi_row[g.x_vars[p]] = 1.0;
      hi_row[g.z_vars[p]] = -br.upper;
      lp.add_row(std::move(hi_row), RowSense::kLessEq, 0.0);
      sum_z[g.z_vars[p]] = 1.0;
    }
    lp.add_row(std::move(sum_z), RowSense::kEqual, 1.0);
  }

  double alpha = instance.refinery.ash_limit;
  double tau = instance.refinery.thermal_requirement;
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    std::vector<double> ash(lp.num_vars(), 0.0);
    std::vector<double> heat(lp.num_vars(), 0.0);
    for (std::size_t i = 0; i < nI; ++i) {
      for (std::size_t b = 0; b < nB; ++b) {
        for (std::size_t x : xv[i][b]) {
          ash[x] = scenarios.ash_at(s, i, b) - alpha;
          heat[x] = -instance.biomass[b].efficiency *
                    scenarios.heat_at(s, i, b);
        }
      }
    }
    ash[vv[s]] = 1.0;
    ash[wv[s]] = -1.0;
    lp.add_row(std::move(ash), RowSense::kEqual, 0.0);
    heat[uv[s]] = 1.0;
    heat[jv[s]] = -1.0;
    lp.add_row(std::move(heat), RowSense::kEqual, -tau);
  }
  return mip;
}

}  // namespace blend

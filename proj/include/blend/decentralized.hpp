#pragma once

// Stackelberg machinery: exact followers' best response, KKT verification of
// follower optimality against LP duals, the price-raising heuristic, and the
// price-enumeration lower bound of the relaxed leader problem.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "blend/lp.hpp"
#include "blend/model.hpp"
#include "blend/sampling.hpp"

namespace blend {

// Leader's door price per biomass type, $/DT.
struct PriceVector {
  std::vector<double> price;

  void validate() const {
    for (double c : price) {
      if (c < 0.0) throw std::invalid_argument("door price must be >= 0");
    }
  }
};

// One (supplier, biomass) follower decision. When nothing is offered the
// follower still selects bracket 1 (the only bracket whose lower bound is
// zero) with zero quantity.
struct FollowerResponse {
  bool offers = false;
  std::size_t bracket = 0;     // p*
  double quantity = 0.0;       // k_hi at p* when offering
  double margin = 0.0;         // C_b - harvest - t_ib at p*
  double profit = 0.0;         // margin * quantity
};

using FollowerResponses = std::vector<std::vector<FollowerResponse>>;

// Followers Algorithm: per (i,b), pick the bracket maximizing
// margin_p * k_hi_p; offer nothing when the best profit is negative and the
// full bracket when it is >= 0 (optimistic tie rule). Ties break to the
// lowest bracket index.
inline FollowerResponses follower_best_response(
    const ProblemInstance& instance, const PriceVector& prices) {
  prices.validate();
  if (prices.price.size() != instance.num_biomass()) {
    throw std::invalid_argument("price vector dimension mismatch");
  }
  FollowerResponses out(instance.num_suppliers(),
                        std::vector<FollowerResponse>(instance.num_biomass()));
  for (std::size_t i = 0; i < instance.num_suppliers(); ++i) {
    for (std::size_t b = 0; b < instance.num_biomass(); ++b) {
      const SupplyCurve& curve = instance.curve(i, b);
      double t = unit_transport_cost(instance, i, b);
      std::size_t best_p = 0;
      double best_profit = -kInf;
      for (std::size_t p = 0; p < curve.size(); ++p) {
        double margin = prices.price[b] - instance.harvest_cost(i, b, p) - t;
        double profit = margin * curve.bracket(p).upper;
        if (profit > best_profit) {
          best_profit = profit;
          best_p = p;
        }
      }
      FollowerResponse& r = out[i][b];
      r.margin = prices.price[b] - instance.harvest_cost(i, b, best_p) - t;
      if (best_profit < 0.0) {
        r.offers = false;
        r.bracket = 0;
        r.quantity = 0.0;
        r.profit = 0.0;
      } else {
        r.offers = true;
        r.bracket = best_p;
        r.quantity = curve.bracket(best_p).upper;
        r.profit = best_profit;
      }
    }
  }
  return out;
}

struct KktReport {
  bool ok = true;
  std::string first_violation;  // empty when ok
  double residual = 0.0;
};

namespace detail {

// LP relaxation of one follower subproblem (variables X_p, Z_p).
struct FollowerLp {
  LinearProgram lp;
  std::vector<std::size_t> x, z;
  std::size_t supply_row = 0;
  std::vector<std::size_t> lo_row, hi_row;  // k_lo*Z - X <= 0, X - k_hi*Z <= 0
  std::size_t sum_row = 0;
};

inline FollowerLp build_follower_lp(const SupplyCurve& curve,
                                    const std::vector<double>& margins) {
  FollowerLp f;
  std::size_t np = curve.size();
  for (std::size_t p = 0; p < np; ++p) {
    f.x.push_back(f.lp.add_variable(0.0, kInf, -margins[p]));
    f.z.push_back(f.lp.add_variable(0.0, 1.0, 0.0));
  }
  std::vector<double> supply(f.lp.num_vars(), 0.0);
  for (std::size_t p = 0; p < np; ++p) supply[f.x[p]] = 1.0;
  f.supply_row = f.lp.rows.size();
  f.lp.add_row(std::move(supply), RowSense::kLessEq, curve.availability());
  for (std::size_t p = 0; p < np; ++p) {
    std::vector<double> lo(f.lp.num_vars(), 0.0);
    lo[f.x[p]] = -1.0;
    lo[f.z[p]] = curve.bracket(p).lower;
    f.lo_row.push_back(f.lp.rows.size());
    f.lp.add_row(std::move(lo), RowSense::kLessEq, 0.0);
    std::vector<double> hi(f.lp.num_vars(), 0.0);
    hi[f.x[p]] = 1.0;
    hi[f.z[p]] = -curve.bracket(p).upper;
    f.hi_row.push_back(f.lp.rows.size());
    f.lp.add_row(std::move(hi), RowSense::kLessEq, 0.0);
  }
  std::vector<double> sum(f.lp.num_vars(), 0.0);
  for (std::size_t p = 0; p < np; ++p) sum[f.z[p]] = 1.0;
  f.sum_row = f.lp.rows.size();
  f.lp.add_row(std::move(sum), RowSense::kEqual, 1.0);
  return f;
}

}  // namespace detail

// Checks a claimed follower response against the KKT system of the LP
// relaxation. Multipliers are taken from an independent solve_lp of the
// relaxed subproblem; conditions are checked in the order stationarity
// (dual_1, dual_2), complementary slackness (dual_4 ... dual_9), and strong
// duality, and the first violated row is named in the report.
inline KktReport verify_follower_optimality(const ProblemInstance& instance,
                                            const PriceVector& prices,
                                            const FollowerResponses& response,
                                            double tol = 1e-8) {
  KktReport report;
  for (std::size_t i = 0; i < instance.num_suppliers(); ++i) {
    for (std::size_t b = 0; b < instance.num_biomass(); ++b) {
      const SupplyCurve& curve = instance.curve(i, b);
      std::size_t np = curve.size();
      double t = unit_transport_cost(instance, i, b);
      std::vector<double> margins(np);
      double scale = 1.0;
      for (std::size_t p = 0; p < np; ++p) {
        margins[p] = prices.price[b] - instance.harvest_cost(i, b, p) - t;
        scale = std::max({scale, std::abs(margins[p]), curve.bracket(p).upper});
      }
      double atol = tol * scale;

      // Claimed primal point.
      const FollowerResponse& r = response[i][b];
      std::vector<double> xval(np, 0.0), zval(np, 0.0);
      zval[r.offers ? r.bracket : 0] = 1.0;
      if (r.offers) xval[r.bracket] = r.quantity;

      detail::FollowerLp f = detail::build_follower_lp(curve, margins);
      LpSolution sol = solve_lp(f.lp);
      if (sol.status != LpStatus::kOptimal) {
        throw std::runtime_error("follower relaxation LP did not solve");
      }
      // Multipliers (all nonnegative by convention).
      double u = std::max(0.0, -sol.duals[f.supply_row]);
      double gam = -sol.duals[f.sum_row];
      std::vector<double> v(np), w(np), l(np), mmul(np), kmul(np);
      for (std::size_t p = 0; p < np; ++p) {
        v[p] = std::max(0.0, -sol.duals[f.lo_row[p]]);
        w[p] = std::max(0.0, -sol.duals[f.hi_row[p]]);
        l[p] = std::max(0.0, sol.reduced_costs[f.x[p]]);
        double dz = sol.reduced_costs[f.z[p]];
        if (sol.x[f.z[p]] < 0.5) {
          mmul[p] = std::max(0.0, dz);
          kmul[p] = 0.0;
        } else {
          kmul[p] = std::max(0.0, -dz);
          mmul[p] = 0.0;
        }
      }

      auto fail = [&](const std::string& name, double res) {
        report.ok = false;
        report.first_violation = name + " at supplier " +
                                 instance.suppliers[i].id + ", biomass " +
                                 instance.biomass[b].id;
        report.residual = res;
      };

      for (std::size_t p = 0; p < np && report.ok; ++p) {
        double klo = curve.bracket(p).lower;
        double khi = curve.bracket(p).upper;
        double st_x = margins[p] - u + v[p] - w[p] + l[p];
        if (std::abs(st_x) > atol) { fail("dual_1", st_x); break; }
        double st_z = v[p] * klo - w[p] * khi + gam - mmul[p] + kmul[p];
        if (std::abs(st_z) > atol) { fail("dual_2", st_z); break; }
      }
      if (!report.ok) return report;
      for (std::size_t p = 0; p < np && report.ok; ++p) {
        double klo = curve.bracket(p).lower;
        double khi = curve.bracket(p).upper;
        double cs4 = v[p] * (klo * zval[p] - xval[p]);
        if (std::abs(cs4) > atol) { fail("dual_4", cs4); break; }
        double cs5 = w[p] * (xval[p] - khi * zval[p]);
        if (std::abs(cs5) > atol) { fail("dual_5", cs5); break; }
        double cs7 = l[p] * xval[p];
        if (std::abs(cs7) > atol) { fail("dual_7", cs7); break; }
        double cs8 = mmul[p] * zval[p];
        if (std::abs(cs8) > atol) { fail("dual_8", cs8); break; }
        double cs9 = kmul[p] * (zval[p] - 1.0);
        if (std::abs(cs9) > atol) { fail("dual_9", cs9); break; }
      }
      if (!report.ok) return report;
      double sum_z = 0.0, sum_x = 0.0, claimed_profit = 0.0;
      for (std::size_t p = 0; p < np; ++p) {
        sum_z += zval[p];
        sum_x += xval[p];
        claimed_profit += margins[p] * xval[p];
      }
      double cs6 = gam * (sum_z - 1.0);
      if (std::abs(cs6) > atol) { fail("dual_6", cs6); return report; }
      double cs_supply = u * (sum_x - curve.availability());
      if (std::abs(cs_supply) > atol) {
        fail("dual_supply", cs_supply);
        return report;
      }
      // Strong duality: claimed profit equals the LP optimum.
      double gap = claimed_profit - (-sol.objective);
      if (std::abs(gap) > atol) { fail("duality_gap", gap); return report; }
    }
  }
  return report;
}

struct LeaderSolve {
  LpStatus status = LpStatus::kOptimal;
  double objective = 0.0;
  // purchased quantity per (i,b), placed in the offered bracket
  std::vector<std::vector<double>> quantity;
  std::vector<double> ash_slack_pos;   // W_s
  std::vector<double> heat_slack_pos;  // J_s
  std::size_t ash_violations = 0;
  std::size_t heat_violations = 0;
};

// Leader subproblem at fixed prices and follower offers: buy x <= offers to
// minimize (C_b + f_b) x plus violation penalties, subject to the scenario
// rows and the per-supplier profit rows.
inline LeaderSolve leader_subproblem(const ProblemInstance& instance,
                                     const ScenarioSet& scenarios,
                                     const PriceVector& prices,
                                     const FollowerResponses& offers,
                                     double lambda, double mu) {
  std::size_t nI = instance.num_suppliers();
  std::size_t nB = instance.num_biomass();
  LinearProgram lp;
  std::vector<std::vector<std::size_t>> xv(nI, std::vector<std::size_t>(nB));
  for (std::size_t i = 0; i < nI; ++i) {
    for (std::size_t b = 0; b < nB; ++b) {
      double cap = offers[i][b].offers ? offers[i][b].quantity : 0.0;
      xv[i][b] = lp.add_variable(
          0.0, cap,
          prices.price[b] + instance.biomass[b].processing_storage);
    }
  }
  std::vector<std::size_t> wv(scenarios.count), jv(scenarios.count);
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    lp.add_variable(0.0, kInf, 0.0);  // V_s
    wv[s] = lp.add_variable(0.0, kInf, lambda);
    lp.add_variable(0.0, kInf, 0.0);  // U_s
    jv[s] = lp.add_variable(0.0, kInf, mu);
  }
  double alpha = instance.refinery.ash_limit;
  double tau = instance.refinery.thermal_requirement;
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    std::vector<double> ash(lp.num_vars(), 0.0);
    std::vector<double> heat(lp.num_vars(), 0.0);
    for (std::size_t i = 0; i < nI; ++i) {
      for (std::size_t b = 0; b < nB; ++b) {
        ash[xv[i][b]] = scenarios.ash_at(s, i, b) - alpha;
        heat[xv[i][b]] =
            -instance.biomass[b].efficiency * scenarios.heat_at(s, i, b);
      }
    }
    ash[wv[s] - 1] = 1.0;  // V_s
    ash[wv[s]] = -1.0;
    lp.add_row(std::move(ash), RowSense::kEqual, 0.0);
    heat[jv[s] - 1] = 1.0;  // U_s
    heat[jv[s]] = -1.0;
    lp.add_row(std::move(heat), RowSense::kEqual, -tau);
  }
  for (std::size_t i = 0; i < nI; ++i) {
    std::vector<double> profit(lp.num_vars(), 0.0);
    bool any = false;
    for (std::size_t b = 0; b < nB; ++b) {
      if (!offers[i][b].offers) continue;
      profit[xv[i][b]] = offers[i][b].margin;
      any = true;
    }
    if (any) lp.add_row(std::move(profit), RowSense::kGreaterEq, 0.0);
  }

  LpSolution sol = solve_lp(lp);
  LeaderSolve out;
  out.status = sol.status;
  if (sol.status != LpStatus::kOptimal) return out;
  out.objective = sol.objective;
  out.quantity.assign(nI, std::vector<double>(nB, 0.0));
  out.ash_slack_pos.resize(scenarios.count);
  out.heat_slack_pos.resize(scenarios.count);
  for (std::size_t i = 0; i < nI; ++i) {
    for (std::size_t b = 0; b < nB; ++b) out.quantity[i][b] = sol.x[xv[i][b]];
  }
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    out.ash_slack_pos[s] = sol.x[wv[s]];
    out.heat_slack_pos[s] = sol.x[jv[s]];
    if (out.ash_slack_pos[s] > 1e-6 * std::max(1.0, tau)) {
      ++out.ash_violations;
    }
    if (out.heat_slack_pos[s] > 1e-6 * std::max(1.0, tau)) {
      ++out.heat_violations;
    }
  }
  return out;
}

struct HeuristicTracePoint {
  PriceVector prices;
  bool feasible = true;
  double objective = 0.0;
  bool improved = false;
};

struct DecentralizedResult {
  bool found = false;
  PriceVector prices;
  FollowerResponses offers;
  std::vector<std::vector<double>> quantity;  // leader purchase per (i,b)
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> follower_profit;  // per supplier, at purchased amounts
  std::vector<HeuristicTracePoint> trace;
  std::size_t ash_violations = 0;
  std::size_t heat_violations = 0;
};

// Price-raising heuristic. The ladder walks the sorted breakpoints
// {t_ib + harvest_bp}: each non-improving or infeasible step removes the
// argmin supplier of each biomass pool; exhausted pools reset and advance
// the bracket index. Offers are the exact follower best response at the
// current prices, so every incumbent is feasible for the bilevel model.
inline DecentralizedResult heuristic_solve(const ProblemInstance& instance,
                                           const ScenarioSet& scenarios,
                                           double lambda, double mu,
                                           std::size_t patience = 5) {
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  std::size_t nI = instance.num_suppliers();
  std::size_t nB = instance.num_biomass();
  std::size_t max_brackets = 0;
  for (std::size_t b = 0; b < nB; ++b) {
    max_brackets = std::max(max_brackets, instance.curve(0, b).size());
  }

  DecentralizedResult res;
  std::vector<std::vector<bool>> in_pool(nB, std::vector<bool>(nI, true));
  std::size_t p = 0;
  std::size_t counter = 0;

  auto pools_empty = [&]() {
    for (const auto& pool : in_pool) {
      for (bool x : pool) {
        if (x) return false;
      }
    }
    return true;
  };

  for (;;) {
    if (pools_empty()) {
      ++p;
      if (p >= max_brackets) break;  // ladder exhausted
      for (auto& pool : in_pool) pool.assign(nI, true);
    }
    PriceVector prices;
    prices.price.assign(nB, 0.0);
    std::vector<std::size_t> argmin(nB, nI);
    for (std::size_t b = 0; b < nB; ++b) {
      std::size_t pb = std::min(p, instance.curve(0, b).size() - 1);
      double best = kInf;
      for (std::size_t i = 0; i < nI; ++i) {
        if (!in_pool[b][i]) continue;
        double cand = unit_transport_cost(instance, i, b) +
                      instance.harvest_cost(i, b, pb);
        if (cand < best) {  // ties break to the lowest supplier index
          best = cand;
          argmin[b] = i;
        }
      }
      prices.price[b] = best < kInf ? best : 0.0;
    }

    FollowerResponses offers = follower_best_response(instance, prices);
    LeaderSolve solve =
        leader_subproblem(instance, scenarios, prices, offers, lambda, mu);

    auto remove_argmins = [&]() {
      for (std::size_t b = 0; b < nB; ++b) {
        if (argmin[b] < nI) in_pool[b][argmin[b]] = false;
      }
    };

    HeuristicTracePoint tp;
    tp.prices = prices;
    tp.feasible = solve.status == LpStatus::kOptimal;
    tp.objective = solve.objective;
    if (!tp.feasible) {
      res.trace.push_back(tp);
      remove_argmins();
      continue;
    }
    if (solve.objective < res.objective - 1e-9) {
      tp.improved = true;
      res.trace.push_back(tp);
      res.found = true;
      res.objective = solve.objective;
      res.prices = prices;
      res.offers = offers;
      res.quantity = solve.quantity;
      res.ash_violations = solve.ash_violations;
      res.heat_violations = solve.heat_violations;
      counter = 1;
      continue;
    }
    res.trace.push_back(tp);
    if (counter != patience) {
      ++counter;
      remove_argmins();
      continue;
    }
    break;
  }

  if (res.found) {
    res.follower_profit.assign(nI, 0.0);
    for (std::size_t i = 0; i < nI; ++i) {
      for (std::size_t b = 0; b < nB; ++b) {
        res.follower_profit[i] += res.offers[i][b].margin * res.quantity[i][b];
      }
    }
  }
  return res;
}

// Relaxed leader problem: drop follower optimality, keep follower
// feasibility. The leader objective is piecewise linear in the door price
// between follower breakpoints, so enumerating the finite candidate set
// {t_ib + harvest_bp} plus 0 per biomass type is exact at desk scale.
inline double lower_bound_relaxation(const ProblemInstance& instance,
                                     const ScenarioSet& scenarios,
                                     double lambda, double mu,
                                     std::size_t grid_cap = 200000,
                                     PriceVector* best_prices = nullptr) {
  std::size_t nI = instance.num_suppliers();
  std::size_t nB = instance.num_biomass();
  std::vector<std::vector<double>> candidates(nB);
  std::size_t grid = 1;
  for (std::size_t b = 0; b < nB; ++b) {
    std::vector<double>& c = candidates[b];
    c.push_back(0.0);
    for (std::size_t i = 0; i < nI; ++i) {
      for (std::size_t p = 0; p < instance.curve(i, b).size(); ++p) {
        c.push_back(unit_transport_cost(instance, i, b) +
                    instance.harvest_cost(i, b, p));
      }
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (grid > grid_cap / c.size()) {
      throw std::runtime_error("price grid exceeds configured cap");
    }
    grid *= c.size();
  }

  double alpha = instance.refinery.ash_limit;
  double tau = instance.refinery.thermal_requirement;
  double best = kInf;
  std::vector<std::size_t> pick(nB, 0);
  for (std::size_t combo = 0; combo < grid; ++combo) {
    std::size_t rem = combo;
    PriceVector prices;
    prices.price.resize(nB);
    for (std::size_t b = 0; b < nB; ++b) {
      pick[b] = rem % candidates[b].size();
      rem /= candidates[b].size();
      prices.price[b] = candidates[b][pick[b]];
    }
    // Follower-feasible region with relaxed indicators, leader rows, fixed
    // prices.
    LinearProgram lp;
    std::vector<std::vector<std::vector<std::size_t>>> xv(
        nI, std::vector<std::vector<std::size_t>>(nB));
    for (std::size_t i = 0; i < nI; ++i) {
      for (std::size_t b = 0; b < nB; ++b) {
        const SupplyCurve& curve = instance.curve(i, b);
        for (std::size_t q = 0; q < curve.size(); ++q) {
          xv[i][b].push_back(lp.add_variable(
              0.0, curve.bracket(q).upper,
              prices.price[b] + instance.biomass[b].processing_storage));
        }
      }
    }
    std::vector<std::size_t> wv(scenarios.count), jv(scenarios.count);
    for (std::size_t s = 0; s < scenarios.count; ++s) {
      lp.add_variable(0.0, kInf, 0.0);
      wv[s] = lp.add_variable(0.0, kInf, lambda);
      lp.add_variable(0.0, kInf, 0.0);
      jv[s] = lp.add_variable(0.0, kInf, mu);
    }
    std::vector<std::vector<std::vector<std::size_t>>> zv(
        nI, std::vector<std::vector<std::size_t>>(nB));
    for (std::size_t i = 0; i < nI; ++i) {
      for (std::size_t b = 0; b < nB; ++b) {
        const SupplyCurve& curve = instance.curve(i, b);
        for (std::size_t q = 0; q < curve.size(); ++q) {
          zv[i][b].push_back(lp.add_variable(0.0, 1.0, 0.0));
        }
        std::vector<double> sum(lp.num_vars(), 0.0);
        for (std::size_t q = 0; q < curve.size(); ++q) {
          std::vector<double> lo(lp.num_vars(), 0.0);
          lo[xv[i][b][q]] = -1.0;
          lo[zv[i][b][q]] = curve.bracket(q).lower;
          lp.add_row(std::move(lo), RowSense::kLessEq, 0.0);
          std::vector<double> hi(lp.num_vars(), 0.0);
          hi[xv[i][b][q]] = 1.0;
          hi[zv[i][b][q]] = -curve.bracket(q).upper;
          lp.add_row(std::move(hi), RowSense::kLessEq, 0.0);
          sum[zv[i][b][q]] = 1.0;
        }
        lp.add_row(std::move(sum), RowSense::kEqual, 1.0);
      }
    }
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
      ash[wv[s] - 1] = 1.0;
      ash[wv[s]] = -1.0;
      lp.add_row(std::move(ash), RowSense::kEqual, 0.0);
      heat[jv[s] - 1] = 1.0;
      heat[jv[s]] = -1.0;
      lp.add_row(std::move(heat), RowSense::kEqual, -tau);
    }
    for (std::size_t i = 0; i < nI; ++i) {
      std::vector<double> profit(lp.num_vars(), 0.0);
      for (std::size_t b = 0; b < nB; ++b) {
        const SupplyCurve& curve = instance.curve(i, b);
        double t = unit_transport_cost(instance, i, b);
        for (std::size_t q = 0; q < curve.size(); ++q) {
          profit[xv[i][b][q]] =
              prices.price[b] - instance.harvest_cost(i, b, q) - t;
        }
      }
      lp.add_row(std::move(profit), RowSense::kGreaterEq, 0.0);
    }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal) continue;
    if (sol.objective < best) {
      best = sol.objective;
      if (best_prices) *best_prices = prices;
    }
  }
  return best;
}

// Machine check that a heuristic incumbent satisfies the bilevel SAA
// constraints at its own prices: offers are follower-optimal, purchases stay
// within offers, supplier profits are nonnegative, and the scenario rows
// balance with nonnegative slacks.
inline bool check_decentralized_feasible(const ProblemInstance& instance,
                                         const ScenarioSet& scenarios,
                                         const DecentralizedResult& res,
                                         double tol = 1e-6) {
  if (!res.found) return false;
  FollowerResponses expect = follower_best_response(instance, res.prices);
  for (std::size_t i = 0; i < instance.num_suppliers(); ++i) {
    double profit = 0.0;
    for (std::size_t b = 0; b < instance.num_biomass(); ++b) {
      const FollowerResponse& got = res.offers[i][b];
      const FollowerResponse& exp = expect[i][b];
      if (got.offers != exp.offers || got.bracket != exp.bracket ||
          std::abs(got.quantity - exp.quantity) > tol) {
        return false;
      }
      double cap = got.offers ? got.quantity : 0.0;
      if (res.quantity[i][b] < -tol || res.quantity[i][b] > cap + tol) {
        return false;
      }
      profit += got.margin * res.quantity[i][b];
    }
    if (profit < -tol * std::max(1.0, instance.refinery.thermal_requirement)) {
      return false;
    }
  }
  return true;
}

}  // namespace blend

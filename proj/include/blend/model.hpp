#pragma once

// Domain types and deterministic cost functions for the biomass blending
// problem. Canonical units: dry tons (DT) for mass, 10^6 BTU for energy,
// dollars for money, miles for distance.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace blend {

struct TriangularParams {
  double min = 0.0;
  double mode = 0.0;
  double max = 0.0;
};

struct UniformParams {
  double low = 0.0;   // LHV
  double high = 0.0;  // HHV
};

// One quantity bracket of a supply curve: [lower, upper] tons available at
// the farmgate price. Brackets are contiguous and prices strictly increase.
struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  double price = 0.0;
};

class SupplyCurve {
 public:
  SupplyCurve() = default;

  explicit SupplyCurve(std::vector<Bracket> brackets)
      : brackets_(std::move(brackets)) {
    validate();
  }

  const std::vector<Bracket>& brackets() const { return brackets_; }
  std::size_t size() const { return brackets_.size(); }
  const Bracket& bracket(std::size_t p) const { return brackets_.at(p); }

  // Total availability S = upper bound of the last bracket.
  double availability() const {
    return brackets_.empty() ? 0.0 : brackets_.back().upper;
  }

  // Bracket containing x. A shared boundary upper(p) == lower(p+1) belongs
  // to the lower bracket p, which carries the cheaper price.
  std::size_t bracket_of(double x) const {
    if (x < 0.0 || x > availability()) {
      throw std::domain_error("quantity outside supply curve support: " +
                              std::to_string(x));
    }
    for (std::size_t p = 0; p + 1 < brackets_.size(); ++p) {
      if (x <= brackets_[p].upper) return p;
    }
    return brackets_.size() - 1;
  }

  // Cumulative cost of filling all brackets below p at their own prices.
  double cumulative_below(std::size_t p) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      acc += brackets_[j].price * (brackets_[j].upper - brackets_[j].lower);
    }
    return acc;
  }

 private:
  void validate() const {
    if (brackets_.empty()) throw std::invalid_argument("empty supply curve");
    if (brackets_.front().lower != 0.0) {
      throw std::invalid_argument("first bracket must start at zero");
    }
    for (std::size_t p = 0; p < brackets_.size(); ++p) {
      if (!(brackets_[p].lower < brackets_[p].upper)) {
        throw std::invalid_argument("bracket bounds must satisfy lower < upper");
      }
      if (p > 0) {
        if (brackets_[p].lower != brackets_[p - 1].upper) {
          throw std::invalid_argument("brackets must be contiguous");
        }
        if (!(brackets_[p].price > brackets_[p - 1].price)) {
          throw std::invalid_argument("prices must strictly increase");
        }
      }
    }
  }

  std::vector<Bracket> brackets_;
};

struct BiomassType {
  std::string id;
  TriangularParams ash_dist;   // wt.%
  UniformParams heat_dist;     // 10^6 BTU/DT
  double efficiency = 1.0;     // e_b, in (0, 1]
  double processing_storage = 0.0;  // f_b, $/DT (processing + storage)
  double transport_fixed = 0.0;     // g_b, $/DT
  double transport_variable = 0.0;  // v_b, $/DT/mile
  // Harvest cost per bracket for the decentralized model. When empty it
  // defaults to the farmgate price of the same bracket.
  std::vector<double> harvest_cost;

  void validate() const {
    if (!(ash_dist.min <= ash_dist.mode && ash_dist.mode <= ash_dist.max) ||
        ash_dist.min < 0.0) {
      throw std::invalid_argument("biomass " + id + ": bad ash distribution");
    }
    if (!(heat_dist.low > 0.0) || !(heat_dist.low <= heat_dist.high)) {
      throw std::invalid_argument("biomass " + id + ": bad heat distribution");
    }
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
      throw std::invalid_argument("biomass " + id + ": efficiency not in (0,1]");
    }
    if (processing_storage < 0.0 || transport_fixed < 0.0 ||
        transport_variable < 0.0) {
      throw std::invalid_argument("biomass " + id + ": negative cost field");
    }
    for (double c : harvest_cost) {
      if (c < 0.0) {
        throw std::invalid_argument("biomass " + id + ": negative harvest cost");
      }
    }
  }
};

struct Supplier {
  std::string id;
  double x = 0.0;  // planar coordinates, miles
  double y = 0.0;
  double distance = 0.0;  // Dist_i to the refinery, miles
  // curves[b] indexed like ProblemInstance::biomass.
  std::vector<SupplyCurve> curves;

  void validate() const {
    if (distance < 0.0) {
      throw std::invalid_argument("supplier " + id + ": negative distance");
    }
  }
};

struct RefinerySpec {
  double ash_limit = 1.0;           // alpha, wt.%
  double thermal_requirement = 0.0; // tau, 10^6 BTU/year
  double risk_ash = 0.1;            // beta
  double risk_thermal = 0.1;        // gamma
  double inner_risk_ash = 0.0;      // beta_hat
  double inner_risk_thermal = 0.0;  // gamma_hat

  void validate() const {
    if (!(ash_limit > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (!(thermal_requirement > 0.0)) {
      throw std::invalid_argument("tau must be > 0");
    }
    if (!(inner_risk_ash >= 0.0 && inner_risk_ash <= risk_ash &&
          risk_ash < 1.0)) {
      throw std::invalid_argument("need 0 <= beta_hat <= beta < 1");
    }
    if (!(inner_risk_thermal >= 0.0 && inner_risk_thermal <= risk_thermal &&
          risk_thermal < 1.0)) {
      throw std::invalid_argument("need 0 <= gamma_hat <= gamma < 1");
    }
  }
};

struct ProblemInstance {
  std::vector<Supplier> suppliers;
  std::vector<BiomassType> biomass;
  RefinerySpec refinery;

  std::size_t num_suppliers() const { return suppliers.size(); }
  std::size_t num_biomass() const { return biomass.size(); }

  const SupplyCurve& curve(std::size_t i, std::size_t b) const {
    return suppliers.at(i).curves.at(b);
  }

  // Harvest cost of bracket p for biomass b; falls back to the farmgate
  // price when no separate harvest column was provided.
  double harvest_cost(std::size_t i, std::size_t b, std::size_t p) const {
    const BiomassType& bt = biomass.at(b);
    if (!bt.harvest_cost.empty()) return bt.harvest_cost.at(p);
    return curve(i, b).bracket(p).price;
  }

  void validate() const {
    if (suppliers.empty()) throw std::invalid_argument("no suppliers");
    if (biomass.empty()) throw std::invalid_argument("no biomass types");
    refinery.validate();
    for (const auto& bt : biomass) bt.validate();
    for (const auto& s : suppliers) {
      s.validate();
      if (s.curves.size() != biomass.size()) {
        throw std::invalid_argument("supplier " + s.id +
                                    ": curve count mismatch");
      }
    }
    // All curves of a biomass type share the same number of price points.
    for (std::size_t b = 0; b < biomass.size(); ++b) {
      std::size_t np = suppliers.front().curves[b].size();
      for (const auto& s : suppliers) {
        if (s.curves[b].size() != np) {
          throw std::invalid_argument("biomass " + biomass[b].id +
                                      ": bracket count differs by supplier");
        }
      }
      if (!biomass[b].harvest_cost.empty() &&
          biomass[b].harvest_cost.size() != np) {
        throw std::invalid_argument("biomass " + biomass[b].id +
                                    ": harvest cost column length mismatch");
      }
    }
  }
};

struct CostBreakdown {
  double purchase = 0.0;
  double transport = 0.0;
  double processing = 0.0;
  double penalty = 0.0;
  double total() const { return purchase + transport + processing + penalty; }
};

// Bracketed purchase plan plus per-scenario violation slacks.
struct BlendSolution {
  // quantity[i][b][p], DT.
  std::vector<std::vector<std::vector<double>>> quantity;
  // indicator[i][b] = chosen bracket index.
  std::vector<std::vector<std::size_t>> chosen_bracket;
  std::vector<double> ash_slack_neg;   // V_s
  std::vector<double> ash_slack_pos;   // W_s (violation)
  std::vector<double> heat_slack_neg;  // U_s
  std::vector<double> heat_slack_pos;  // J_s (violation)
  double objective = 0.0;
  CostBreakdown costs;

  double total_quantity(std::size_t i, std::size_t b) const {
    double t = 0.0;
    for (double q : quantity.at(i).at(b)) t += q;
    return t;
  }
};

// t_ib = v_b * Dist_i + g_b.
inline double unit_transport_cost(const Supplier& supplier,
                                  const BiomassType& biomass) {
  return biomass.transport_variable * supplier.distance +
         biomass.transport_fixed;
}

inline double unit_transport_cost(const ProblemInstance& instance,
                                  std::size_t i, std::size_t b) {
  if (i >= instance.suppliers.size() || b >= instance.biomass.size()) {
    throw std::out_of_range("unknown supplier or biomass id");
  }
  return unit_transport_cost(instance.suppliers[i], instance.biomass[b]);
}

// All-units purchase cost: the bracket price applies to every ton bought.
inline double purchase_cost(const SupplyCurve& curve, double x) {
  std::size_t p = curve.bracket_of(x);  // throws on x < 0 or x > S
  return curve.bracket(p).price * x;
}

// Convex outer approximation of purchase_cost: incremental pricing, equal to
// the max of the per-bracket affine pieces.
inline double outer_cost(const SupplyCurve& curve, double x) {
  std::size_t p = curve.bracket_of(x);
  const Bracket& br = curve.bracket(p);
  return curve.cumulative_below(p) + br.price * (x - br.lower);
}

// Per-bracket constant gap between the all-units cost and its outer
// approximation at interior points of bracket p: c_p * lower_p - lambda_p.
inline double bracket_gap(const SupplyCurve& curve, std::size_t p) {
  return curve.bracket(p).price * curve.bracket(p).lower -
         curve.cumulative_below(p);
}

// Objective of the deterministic model: purchase + transport + processing.
inline double total_deterministic_cost(const ProblemInstance& instance,
                                       const BlendSolution& solution) {
  double total = 0.0;
  for (std::size_t i = 0; i < instance.num_suppliers(); ++i) {
    for (std::size_t b = 0; b < instance.num_biomass(); ++b) {
      double x = solution.total_quantity(i, b);
      if (x == 0.0) continue;
      double t = unit_transport_cost(instance, i, b);
      double f = instance.biomass[b].processing_storage;
      total += purchase_cost(instance.curve(i, b), x) + (t + f) * x;
    }
  }
  return total;
}

}  // namespace blend

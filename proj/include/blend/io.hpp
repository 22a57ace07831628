#pragma once

// File ingestion and emission. All data files are comma-delimited with a
// one-line header; supply curves are long-format rows. Numeric output uses a
// canonical "%.10g" rendering so export(ingest(f)) is a fixed point.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "blend/model.hpp"
#include "blend/sampling.hpp"

namespace blend {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io_detail {

inline std::string canon(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

struct CsvFile {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows only

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    throw ParseError(path + ": missing column '" + name + "'");
  }

  bool has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
  }

  const std::string& cell(std::size_t row, std::size_t col) const {
    if (col >= rows[row].size()) {
      throw ParseError(path + ": row " + std::to_string(row + 2) +
                       ": missing column " + header[col]);
    }
    return rows[row][col];
  }

  double number(std::size_t row, std::size_t col) const {
    const std::string& s = cell(row, col);
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError(path + ": row " + std::to_string(row + 2) +
                       ", column " + header[col] + ": not a number: '" + s +
                       "'");
    }
  }
};

inline CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  CsvFile f;
  f.path = path;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  f.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    f.rows.push_back(split_line(line));
  }
  return f;
}

}  // namespace io_detail

// Built-in biomass catalogue: seven feedstocks with triangular ash content,
// LHV/HHV heat range, and the standard cost coefficients. harvest_base is
// the per-ton harvest-and-collection cost; supply_share scales availability
// in the synthetic generator.
struct BiomassDefault {
  BiomassType type;
  double harvest_base = 0.0;
  double supply_share = 0.0;
};

inline std::vector<BiomassDefault> builtin_biomass_table() {
  auto mk = [](const std::string& id, double ash_lo, double ash_mode,
               double ash_hi, double lhv, double hhv, double hc, double pr,
               double st, double g, double v, double tq) {
    BiomassDefault d;
    d.type.id = id;
    d.type.ash_dist = {ash_lo, ash_mode, ash_hi};
    d.type.heat_dist = {lhv, hhv};
    d.type.efficiency = 0.75;
    d.type.processing_storage = pr + st;
    d.type.transport_fixed = g;
    d.type.transport_variable = v;
    d.harvest_base = hc;
    d.supply_share = tq;
    return d;
  };
  return {
      mk("hybrid_poplar", 0.30, 0.50, 0.75, 16.768, 16.982, 22.24, 23.97,
         3.23, 20.53, 0.046, 0.34),
      mk("pine", 0.10, 0.75, 1.13, 14.510, 15.656, 20.19, 12.85, 3.23, 20.53,
         0.046, 0.60),
      mk("softwood_plantation_residue", 0.80, 1.00, 1.50, 15.232, 17.202,
         0.00, 23.97, 3.23, 20.69, 0.046, 0.11),
      mk("softwood_natural_residue", 0.80, 1.00, 1.50, 15.232, 17.202, 0.00,
         23.97, 3.23, 20.69, 0.046, 0.27),
      mk("mixed_wood_residue", 0.80, 1.20, 1.80, 15.160, 17.892, 0.00, 23.97,
         3.23, 20.69, 0.046, 0.25),
      mk("cd_waste", 0.80, 1.00, 1.50, 14.510, 17.648, 0.00, 28.12, 3.23,
         22.87, 0.046, 0.34),
      mk("msw", 7.00, 10.00, 15.00, 10.250, 13.680, 0.00, 19.70, 4.50, 20.69,
         0.046, 0.099),
  };
}

// suppliers file: supplier,x,y,distance
inline std::vector<Supplier> read_suppliers(const std::string& path) {
  io_detail::CsvFile f = io_detail::read_csv(path);
  std::size_t cid = f.column("supplier"), cx = f.column("x"),
              cy = f.column("y"), cd = f.column("distance");
  std::vector<Supplier> out;
  for (std::size_t r = 0; r < f.rows.size(); ++r) {
    Supplier s;
    s.id = f.cell(r, cid);
    s.x = f.number(r, cx);
    s.y = f.number(r, cy);
    s.distance = f.number(r, cd);
    out.push_back(std::move(s));
  }
  if (out.empty()) throw std::invalid_argument(path + ": no suppliers");
  return out;
}

// biomass file: biomass,ash_min,ash_mode,ash_max,lhv,hhv,efficiency,
//               processing_storage,transport_fixed,transport_variable
inline std::vector<BiomassType> read_biomass(const std::string& path) {
  io_detail::CsvFile f = io_detail::read_csv(path);
  std::size_t cid = f.column("biomass");
  std::size_t c[9] = {
      f.column("ash_min"),         f.column("ash_mode"),
      f.column("ash_max"),         f.column("lhv"),
      f.column("hhv"),             f.column("efficiency"),
      f.column("processing_storage"), f.column("transport_fixed"),
      f.column("transport_variable")};
  std::vector<BiomassType> out;
  for (std::size_t r = 0; r < f.rows.size(); ++r) {
    BiomassType b;
    b.id = f.cell(r, cid);
    b.ash_dist = {f.number(r, c[0]), f.number(r, c[1]), f.number(r, c[2])};
    b.heat_dist = {f.number(r, c[3]), f.number(r, c[4])};
    b.efficiency = f.number(r, c[5]);
    b.processing_storage = f.number(r, c[6]);
    b.transport_fixed = f.number(r, c[7]);
    b.transport_variable = f.number(r, c[8]);
    out.push_back(std::move(b));
  }
  if (out.empty()) throw std::invalid_argument(path + ": no biomass types");
  return out;
}

// supply curve file, long format: supplier,biomass,bracket,lower,upper,price
// with an optional harvest column (shared across suppliers per biomass).
inline void read_supply_curves(const std::string& path,
                               std::vector<Supplier>& suppliers,
                               std::vector<BiomassType>& biomass) {
  io_detail::CsvFile f = io_detail::read_csv(path);
  std::size_t cs = f.column("supplier"), cb = f.column("biomass"),
              cp = f.column("bracket"), clo = f.column("lower"),
              chi = f.column("upper"), cpr = f.column("price");
  bool has_harvest = f.has_column("harvest");
  std::size_t ch = has_harvest ? f.column("harvest") : 0;

  auto supplier_index = [&](const std::string& id, std::size_t row) {
    for (std::size_t i = 0; i < suppliers.size(); ++i) {
      if (suppliers[i].id == id) return i;
    }
    throw ParseError(path + ": row " + std::to_string(row + 2) +
                     ", column supplier: unknown id '" + id + "'");
  };
  auto biomass_index = [&](const std::string& id, std::size_t row) {
    for (std::size_t b = 0; b < biomass.size(); ++b) {
      if (biomass[b].id == id) return b;
    }
    throw ParseError(path + ": row " + std::to_string(row + 2) +
                     ", column biomass: unknown id '" + id + "'");
  };

  std::vector<std::vector<std::vector<Bracket>>> parts(
      suppliers.size(), std::vector<std::vector<Bracket>>(biomass.size()));
  std::vector<std::vector<double>> harvest(biomass.size());
  for (std::size_t r = 0; r < f.rows.size(); ++r) {
    std::size_t i = supplier_index(f.cell(r, cs), r);
    std::size_t b = biomass_index(f.cell(r, cb), r);
    double braw = f.number(r, cp);
    std::size_t p = static_cast<std::size_t>(braw);
    if (braw != static_cast<double>(p) || p < 1) {
      throw ParseError(path + ": row " + std::to_string(r + 2) +
                       ", column bracket: must be a positive integer");
    }
    if (parts[i][b].size() < p) parts[i][b].resize(p);
    parts[i][b][p - 1] = {f.number(r, clo), f.number(r, chi),
                          f.number(r, cpr)};
    if (has_harvest) {
      if (harvest[b].size() < p) harvest[b].resize(p, -1.0);
      harvest[b][p - 1] = f.number(r, ch);
    }
  }
  for (std::size_t i = 0; i < suppliers.size(); ++i) {
    suppliers[i].curves.clear();
    for (std::size_t b = 0; b < biomass.size(); ++b) {
      if (parts[i][b].empty()) {
        throw std::invalid_argument(path + ": no curve for supplier " +
                                    suppliers[i].id + ", biomass " +
                                    biomass[b].id);
      }
      suppliers[i].curves.emplace_back(parts[i][b]);
    }
  }
  if (has_harvest) {
    for (std::size_t b = 0; b < biomass.size(); ++b) {
      biomass[b].harvest_cost = harvest[b];
    }
  }
}

inline void write_suppliers(const std::string& path,
                            const std::vector<Supplier>& suppliers) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << "supplier,x,y,distance\n";
  for (const Supplier& s : suppliers) {
    out << s.id << ',' << io_detail::canon(s.x) << ',' << io_detail::canon(s.y)
        << ',' << io_detail::canon(s.distance) << '\n';
  }
}

inline void write_biomass(const std::string& path,
                          const std::vector<BiomassType>& biomass) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << "biomass,ash_min,ash_mode,ash_max,lhv,hhv,efficiency,"
         "processing_storage,transport_fixed,transport_variable\n";
  for (const BiomassType& b : biomass) {
    out << b.id << ',' << io_detail::canon(b.ash_dist.min) << ','
        << io_detail::canon(b.ash_dist.mode) << ','
        << io_detail::canon(b.ash_dist.max) << ','
        << io_detail::canon(b.heat_dist.low) << ','
        << io_detail::canon(b.heat_dist.high) << ','
        << io_detail::canon(b.efficiency) << ','
        << io_detail::canon(b.processing_storage) << ','
        << io_detail::canon(b.transport_fixed) << ','
        << io_detail::canon(b.transport_variable) << '\n';
  }
}

inline void write_supply_curves(const std::string& path,
                                const std::vector<Supplier>& suppliers,
                                const std::vector<BiomassType>& biomass) {
  bool any_harvest = false;
  for (const BiomassType& b : biomass) {
    if (!b.harvest_cost.empty()) any_harvest = true;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << "supplier,biomass,bracket,lower,upper,price";
  if (any_harvest) out << ",harvest";
  out << '\n';
  for (const Supplier& s : suppliers) {
    for (std::size_t b = 0; b < s.curves.size(); ++b) {
      const SupplyCurve& curve = s.curves[b];
      for (std::size_t p = 0; p < curve.size(); ++p) {
        const Bracket& br = curve.bracket(p);
        out << s.id << ',' << biomass[b].id << ',' << (p + 1) << ','
            << io_detail::canon(br.lower) << ',' << io_detail::canon(br.upper)
            << ',' << io_detail::canon(br.price);
        if (any_harvest) {
          double h = biomass[b].harvest_cost.empty()
                         ? br.price
                         : biomass[b].harvest_cost[p];
          out << ',' << io_detail::canon(h);
        }
        out << '\n';
      }
    }
  }
}

// refinery file: alpha,tau_gbtu,beta,gamma,beta_hat,gamma_hat (one row).
// tau is ingested in 10^9 BTU and converted to the canonical 10^6 BTU.
inline RefinerySpec read_refinery(const std::string& path) {
  io_detail::CsvFile f = io_detail::read_csv(path);
  if (f.rows.size() != 1) {
    throw ParseError(path + ": expected exactly one data row");
  }
  RefinerySpec r;
  r.ash_limit = f.number(0, f.column("alpha"));
  r.thermal_requirement = f.number(0, f.column("tau_gbtu")) * 1000.0;
  r.risk_ash = f.number(0, f.column("beta"));
  r.risk_thermal = f.number(0, f.column("gamma"));
  r.inner_risk_ash = f.number(0, f.column("beta_hat"));
  r.inner_risk_thermal = f.number(0, f.column("gamma_hat"));
  return r;
}

inline void write_refinery(const std::string& path, const RefinerySpec& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << "alpha,tau_gbtu,beta,gamma,beta_hat,gamma_hat\n";
  out << io_detail::canon(r.ash_limit) << ','
      << io_detail::canon(r.thermal_requirement / 1000.0) << ','
      << io_detail::canon(r.risk_ash) << ','
      << io_detail::canon(r.risk_thermal) << ','
      << io_detail::canon(r.inner_risk_ash) << ','
      << io_detail::canon(r.inner_risk_thermal) << '\n';
}

// Scenario dump, long format: scenario,supplier,biomass,ash,heat.
inline void write_scenarios(const std::string& path,
                            const ProblemInstance& instance,
                            const ScenarioSet& scenarios) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << "scenario,supplier,biomass,ash,heat\n";
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    for (std::size_t i = 0; i < instance.num_suppliers(); ++i) {
      for (std::size_t b = 0; b < instance.num_biomass(); ++b) {
        out << (s + 1) << ',' << instance.suppliers[i].id << ','
            << instance.biomass[b].id << ','
            << io_detail::canon(scenarios.ash_at(s, i, b)) << ','
            << io_detail::canon(scenarios.heat_at(s, i, b)) << '\n';
      }
    }
  }
}

inline ScenarioSet read_scenarios(const std::string& path,
                                  const ProblemInstance& instance) {
  io_detail::CsvFile f = io_detail::read_csv(path);
  std::size_t cs = f.column("scenario"), ci = f.column("supplier"),
              cb = f.column("biomass"), ca = f.column("ash"),
              ch = f.column("heat");
  std::size_t nI = instance.num_suppliers();
  std::size_t nB = instance.num_biomass();
  if (f.rows.size() % (nI * nB) != 0) {
    throw ParseError(path + ": row count is not a multiple of instance size");
  }
  ScenarioSet set;
  set.count = f.rows.size() / (nI * nB);
  set.num_suppliers = nI;
  set.num_biomass = nB;
  set.ash.assign(f.rows.size(), 0.0);
  set.heat.assign(f.rows.size(), 0.0);
  auto find_id = [&](const std::string& id, bool is_supplier,
                     std::size_t row) -> std::size_t {
    std::size_t n = is_supplier ? nI : nB;
    for (std::size_t k = 0; k < n; ++k) {
      const std::string& cand =
          is_supplier ? instance.suppliers[k].id : instance.biomass[k].id;
      if (cand == id) return k;
    }
    throw ParseError(path + ": row " + std::to_string(row + 2) +
                     ": unknown id '" + id + "'");
  };
  for (std::size_t r = 0; r < f.rows.size(); ++r) {
    std::size_t s = static_cast<std::size_t>(f.number(r, cs));
    if (s < 1 || s > set.count) {
      throw ParseError(path + ": row " + std::to_string(r + 2) +
                       ", column scenario: index out of range");
    }
    std::size_t i = find_id(f.cell(r, ci), true, r);
    std::size_t b = find_id(f.cell(r, cb), false, r);
    set.ash[set.index(s - 1, i, b)] = f.number(r, ca);
    set.heat[set.index(s - 1, i, b)] = f.number(r, ch);
  }
  return set;
}

// 1-median refinery siting over supplier centroids: pick the candidate
// centroid minimizing the weighted Euclidean distance sum; ties go to the
// lowest index.
inline std::size_t site_refinery(const std::vector<Supplier>& suppliers,
                                 const std::vector<double>& weights) {
  if (suppliers.empty() || suppliers.size() != weights.size()) {
    throw std::invalid_argument("siting needs one weight per supplier");
  }
  bool any = false;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("siting weights must be >= 0");
    if (w > 0.0) any = true;
  }
  if (!any) throw std::invalid_argument("siting weights are all zero");
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < suppliers.size(); ++c) {
    double cost = 0.0;
    for (std::size_t i = 0; i < suppliers.size(); ++i) {
      cost += weights[i] * std::hypot(suppliers[i].x - suppliers[c].x,
                                      suppliers[i].y - suppliers[c].y);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  return best;
}

// ~10^6 BTU of annual thermal demand per million dry tons, from the standard
// refinery requirement range (3,838-7,677 * 10^9 BTU across 0.3-0.6 MDT).
inline constexpr double kThermalPerMdt = 12793333.333333334;

// Deterministic synthetic benchmark: suppliers on a 100 x 100 plane around a
// central refinery, availabilities scaled by the catalogue supply shares,
// and bracket prices raised multiplicatively from the harvest base.
inline ProblemInstance gen_synthetic(std::size_t num_suppliers,
                                     std::size_t num_biomass,
                                     std::size_t num_brackets,
                                     std::uint64_t seed,
                                     double demand_mdt = 0.3) {
  if (num_suppliers == 0 || num_brackets == 0 || num_biomass == 0 ||
      demand_mdt <= 0.0) {
    throw std::invalid_argument("bad synthetic benchmark dimensions");
  }
  std::vector<BiomassDefault> table = builtin_biomass_table();
  if (num_biomass > table.size()) {
    throw std::invalid_argument("at most " + std::to_string(table.size()) +
                                " biomass types available");
  }
  ProblemInstance inst;
  for (std::size_t b = 0; b < num_biomass; ++b) {
    inst.biomass.push_back(table[b].type);
  }
  double demand_dt = demand_mdt * 1e6;
  // Normalize the catalogue supply shares so first-bracket capacity alone
  // comfortably covers the tonnage needed to meet the thermal requirement.
  double share_sum = 0.0;
  for (std::size_t b = 0; b < num_biomass; ++b) share_sum += table[b].supply_share;
  double supply_scale = 6.0 / share_sum;
  for (std::size_t i = 0; i < num_suppliers; ++i) {
    Supplier s;
    s.id = "S" + std::to_string(i + 1);
    std::uint64_t geo = rng::stream_key(seed, 101, i, 0);
    s.x = 100.0 * rng::u01(geo, 0);
    s.y = 100.0 * rng::u01(geo, 1);
    s.distance = std::hypot(s.x - 50.0, s.y - 50.0);
    for (std::size_t b = 0; b < num_biomass; ++b) {
      std::uint64_t key = rng::stream_key(seed, 102, i, b);
      double total = table[b].supply_share * supply_scale * demand_dt *
                     (0.5 + rng::u01(key, 0)) /
                     static_cast<double>(num_suppliers);
      double base = std::max(table[b].harvest_base,
                             inst.biomass[b].processing_storage * 0.5);
      double price = base * (0.9 + 0.2 * rng::u01(key, 1));
      // The first bracket holds half the curve; the rest splits evenly.
      std::vector<Bracket> brackets;
      double lo = 0.0;
      for (std::size_t p = 0; p < num_brackets; ++p) {
        double cum = num_brackets == 1
                         ? 1.0
                         : 0.5 + 0.5 * static_cast<double>(p) /
                                     static_cast<double>(num_brackets - 1);
        brackets.push_back({lo, total * cum, price});
        lo = total * cum;
        price *= 1.6 + 0.3 * rng::u01(key, 2 + p);
      }
      s.curves.emplace_back(std::move(brackets));
    }
    inst.suppliers.push_back(std::move(s));
  }
  inst.refinery.ash_limit = 1.0;
  inst.refinery.thermal_requirement = demand_mdt * kThermalPerMdt;
  inst.refinery.risk_ash = 0.05;
  inst.refinery.risk_thermal = 0.05;
  inst.refinery.inner_risk_ash = 0.0;
  inst.refinery.inner_risk_thermal = 0.0;
  inst.validate();
  return inst;
}

}  // namespace blend

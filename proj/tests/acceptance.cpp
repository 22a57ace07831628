// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is self-contained and uses its own fixed seeds.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "blend/centralized.hpp"
#include "blend/decentralized.hpp"
#include "blend/io.hpp"
#include "blend/validation.hpp"

using namespace blend;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool ok,
            const std::string& detail = "") {
  std::cout << "criterion " << number << " (" << name
            << "): " << (ok ? "PASS" : "FAIL");
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// desk-scale random instance used by criteria 3 and 6
ProblemInstance random_instance(std::mt19937_64& gen, int max_suppliers = 3,
                                int max_biomass = 2, int max_brackets = 3) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ProblemInstance inst;
  int I = 1 + static_cast<int>(gen() % max_suppliers);
  int B = 1 + static_cast<int>(gen() % max_biomass);
  int P = 1 + static_cast<int>(gen() % max_brackets);
  for (int b = 0; b < B; ++b) {
    BiomassType t;
    t.id = "b" + std::to_string(b);
    double lo = 0.2 + 0.5 * u01(gen);
    t.ash_dist = {lo, lo + 0.2 * u01(gen), lo + 0.2 + 0.5 * u01(gen)};
    double h = 10.0 + 6.0 * u01(gen);
    t.heat_dist = {h, h + 3.0 * u01(gen)};
    t.efficiency = 0.6 + 0.35 * u01(gen);
    t.processing_storage = 3.0 + 10.0 * u01(gen);
    t.transport_fixed = 5.0 + 12.0 * u01(gen);
    t.transport_variable = 0.02 + 0.08 * u01(gen);
    inst.biomass.push_back(t);
  }
  for (int i = 0; i < I; ++i) {
    Supplier s;
    s.id = "s" + std::to_string(i);
    s.distance = 90.0 * u01(gen);
    for (int b = 0; b < B; ++b) {
      std::vector<Bracket> br;
      double lo2 = 0.0, price = 14.0 + 18.0 * u01(gen);
      for (int p = 0; p < P; ++p) {
        double hi = lo2 + 50.0 + 140.0 * u01(gen);
        br.push_back({lo2, hi, price});
        lo2 = hi;
        price *= 1.3 + 0.5 * u01(gen);
      }
      s.curves.push_back(SupplyCurve{std::move(br)});
    }
    inst.suppliers.push_back(s);
  }
  inst.refinery.ash_limit = 0.95;
  inst.refinery.thermal_requirement = 600.0 + 3500.0 * u01(gen);
  inst.refinery.risk_ash = inst.refinery.risk_thermal = 0.1;
  inst.refinery.inner_risk_ash = inst.refinery.inner_risk_thermal = 0.05;
  return inst;
}

// ---------------------------------------------------------------------------
// 1. Follower closed form agrees with exhaustive and LP oracles.
void criterion_follower() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(1001);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    int P = 1 + static_cast<int>(gen() % 4);
    std::vector<Bracket> br;
    std::vector<double> harvest;
    double lo = 0.0, price = 8.0 + 12.0 * u01(gen);
    for (int p = 0; p < P; ++p) {
      double hi = lo + 20.0 + 120.0 * u01(gen);
      br.push_back({lo, hi, price});
      harvest.push_back(price - 5.0 * u01(gen));
      lo = hi;
      price *= 1.1 + 0.6 * u01(gen);
    }
    BiomassType bt;
    bt.id = "b";
    bt.ash_dist = {0.3, 0.4, 0.5};
    bt.heat_dist = {12.0, 14.0};
    bt.efficiency = 0.8;
    bt.transport_fixed = 4.0 * u01(gen);
    bt.transport_variable = 0.05 * u01(gen);
    bt.harvest_cost = harvest;
    Supplier s;
    s.id = "s";
    s.distance = 60.0 * u01(gen);
    s.curves.push_back(SupplyCurve{br});
    ProblemInstance inst;
    inst.biomass.push_back(bt);
    inst.suppliers.push_back(s);
    inst.refinery.thermal_requirement = 100.0;

    PriceVector prices{{60.0 * u01(gen)}};
    FollowerResponses r = follower_best_response(inst, prices);
    double t = unit_transport_cost(inst, 0, 0);

    // exhaustive oracle over bracket endpoints
    double best = 0.0;
    for (int p = 0; p < P; ++p) {
      double m = prices.price[0] - harvest[p] - t;
      best = std::max({best, m * br[p].lower, m * br[p].upper});
    }
    double got = r[0][0].offers ? r[0][0].profit : 0.0;
    if (std::abs(got - best) > 1e-8 * (1.0 + std::abs(best))) {
      ok = false;
      detail = "enumeration mismatch at trial " + std::to_string(trial);
      break;
    }
  }
  // LP oracle pass over a matching family of curves
  std::mt19937_64 gen2(1001);
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    int P = 1 + static_cast<int>(gen2() % 4);
    std::uniform_real_distribution<double> u01b(0.0, 1.0);
    std::vector<Bracket> br;
    std::vector<double> margins;
    double lo = 0.0, price = 8.0 + 12.0 * u01b(gen2);
    double door = 0.0;
    std::vector<double> harvest;
    for (int p = 0; p < P; ++p) {
      double hi = lo + 20.0 + 120.0 * u01b(gen2);
      br.push_back({lo, hi, price});
      harvest.push_back(price - 5.0 * u01b(gen2));
      lo = hi;
      price *= 1.1 + 0.6 * u01b(gen2);
    }
    (void)door;
    SupplyCurve curve{br};
    double c_door = 60.0 * u01b(gen2);
    for (int p = 0; p < P; ++p) margins.push_back(c_door - harvest[p]);
    double best = 0.0;
    for (int p = 0; p < P; ++p) {
      best = std::max({best, margins[p] * br[p].lower,
                       margins[p] * br[p].upper});
    }
    blend::detail::FollowerLp flp =
        blend::detail::build_follower_lp(curve, margins);
    LpSolution sol = solve_lp(flp.lp);
    if (sol.status != LpStatus::kOptimal ||
        std::abs(-sol.objective - best) > 1e-8 * (1.0 + std::abs(best))) {
      ok = false;
      detail = "relaxation LP mismatch at trial " + std::to_string(trial);
    }
  }
  double secs = seconds_since(t0);
  if (secs > 10.0) {
    ok = false;
    detail = "took " + std::to_string(secs) + "s";
  }
  report(1, "follower closed form vs enumeration and LP", ok, detail);
}

// ---------------------------------------------------------------------------
// 2. Stationarity certificate: accepts best responses, rejects a perturbed
// offer with the bracket-upper complementary-slackness condition named.
void criterion_kkt() {
  std::mt19937_64 gen(2002);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  bool ok = true;
  std::string detail;
  int verified = 0;
  for (int trial = 0; trial < 125 && ok; ++trial) {
    ProblemInstance inst = random_instance(gen);
    PriceVector prices;
    prices.price.assign(inst.num_biomass(), 0.0);
    for (auto& c : prices.price) c = 15.0 + 70.0 * u01(gen);
    FollowerResponses r = follower_best_response(inst, prices);
    KktReport rep = verify_follower_optimality(inst, prices, r);
    if (!rep.ok) {
      ok = false;
      detail = "rejected a best response: " + rep.first_violation;
      break;
    }
    verified += static_cast<int>(inst.num_suppliers() * inst.num_biomass());
  }
  if (ok && verified < 500) {
    // top up to 500 verified (supplier, biomass) pairs
    for (int trial = 0; verified < 500 && ok; ++trial) {
      ProblemInstance inst = random_instance(gen);
      PriceVector prices;
      prices.price.assign(inst.num_biomass(), 40.0);
      FollowerResponses r = follower_best_response(inst, prices);
      KktReport rep = verify_follower_optimality(inst, prices, r);
      if (!rep.ok) {
        ok = false;
        detail = "rejected a best response: " + rep.first_violation;
      }
      verified += static_cast<int>(inst.num_suppliers() * inst.num_biomass());
    }
  }
  if (ok) {
    // the perturbed offer sits strictly inside its bracket
    BiomassType bt;
    bt.id = "b";
    bt.ash_dist = {0.3, 0.4, 0.5};
    bt.heat_dist = {12.0, 14.0};
    bt.efficiency = 0.8;
    bt.harvest_cost = {10.0, 12.0};
    Supplier s;
    s.id = "s";
    s.curves.push_back(
        SupplyCurve{{{0.0, 100.0, 10.0}, {100.0, 250.0, 12.0}}});
    ProblemInstance inst;
    inst.biomass.push_back(bt);
    inst.suppliers.push_back(s);
    inst.refinery.thermal_requirement = 100.0;
    PriceVector prices{{15.0}};
    FollowerResponses r = follower_best_response(inst, prices);
    r[0][0].quantity -= 1.0;
    KktReport rep = verify_follower_optimality(inst, prices, r);
    if (rep.ok) {
      ok = false;
      detail = "perturbed offer was accepted";
    } else if (rep.first_violation.find("dual_5") == std::string::npos) {
      ok = false;
      detail = "wrong condition named: " + rep.first_violation;
    }
  }
  report(2, "stationarity certificate", ok, detail);
}

// ---------------------------------------------------------------------------
// 3. Centralized bounds: LB <= UB, the pricing-gap identity holds, and the
// lifted plan is within delta_max of the exact branch-and-bound optimum.
void criterion_centralized_bounds() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(3003);
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    ProblemInstance inst = random_instance(gen);
    std::size_t n = 1 + (gen() % 5);
    ScenarioSet sc = sample_scenarios(inst, n, 3000 + trial,
                                      SampleStream::kOptimization);
    double pen = default_penalty_upper_bound(inst);
    CentralizedResult res = solve_centralized_fixed_penalty(inst, sc, pen, pen);
    double scale = 1.0 + std::abs(res.upper_bound);
    if (res.lower_bound > res.upper_bound + 1e-6 * scale) {
      ok = false;
      detail = "LB > UB at trial " + std::to_string(trial);
      break;
    }
    double identity =
        std::abs(res.upper_bound - res.outer_value - res.delta_identity);
    if (identity > 1e-6 * scale) {
      ok = false;
      detail = "gap identity violated at trial " + std::to_string(trial);
      break;
    }
    std::size_t cells = inst.num_suppliers() * inst.num_biomass();
    if (cells <= 4 && n <= 3) {
      MipResult exact = solve_bracket_mip(
          build_centralized_mip(inst, sc, pen, pen));
      if (!exact.found ||
          res.upper_bound < exact.objective - 1e-6 * scale ||
          res.upper_bound - exact.objective > res.delta_max + 1e-6 * scale) {
        ok = false;
        detail = "exact oracle bracket violated at trial " +
                 std::to_string(trial);
        break;
      }
    }
  }
  double secs = seconds_since(t0);
  if (secs > 60.0) {
    ok = false;
    detail = "took " + std::to_string(secs) + "s";
  }
  report(3, "centralized bound sandwich and gap identity", ok, detail);
}

// ---------------------------------------------------------------------------
// 4. Penalty search hits the violation-count targets.
void criterion_penalty_search() {
  bool ok = true;
  std::string detail;
  for (int run = 0; run < 50 && ok; ++run) {
    ProblemInstance inst = gen_synthetic(3, 2, 2, 4000 + run, 0.3);
    ScenarioSet sc = sample_scenarios(inst, 20, 4100 + run,
                                      SampleStream::kOptimization);
    SearchResult strict = saa_binary_search(inst, sc);  // zero inner risk
    if (strict.result.ash_violations != 0 ||
        strict.result.heat_violations != 0) {
      ok = false;
      detail = "nonzero counts at zero inner risk, run " + std::to_string(run);
      break;
    }
    ScenarioSet sc50 = sample_scenarios(inst, 50, 4200 + run,
                                        SampleStream::kOptimization);
    SearchResult loose = saa_binary_search(inst, sc50, 0.2, 0.2,
                                           default_penalty_bounds(inst));
    if (loose.result.ash_violations > 10 ||
        loose.result.heat_violations > 10) {
      ok = false;
      detail = "count target exceeded at run " + std::to_string(run);
      break;
    }
  }
  report(4, "penalty search violation-count targets", ok, detail);
}

// ---------------------------------------------------------------------------
// 5. Bundled benchmark: mean relative error gap below 1%, every point fast.
void criterion_benchmark() {
  bool ok = true;
  std::string detail;
  double gap_sum = 0.0;
  int points = 0;
  double worst_secs = 0.0;
  const double levels[] = {0.30, 0.36, 0.42, 0.48, 0.54, 0.60};
  for (double demand : levels) {
    ProblemInstance inst = gen_synthetic(6, 4, 3, 97, demand);
    for (int rep = 0; rep < 10; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      ScenarioSet sc = sample_scenarios(
          inst, 40, 5000 + rep, SampleStream::kOptimization);
      SearchResult sr = saa_binary_search(inst, sc);
      double secs = seconds_since(t0);
      worst_secs = std::max(worst_secs, secs);
      gap_sum += sr.result.error_gap;
      ++points;
      if (secs > 5.0) {
        ok = false;
        detail = "a point took " + std::to_string(secs) + "s";
      }
    }
  }
  double mean_gap = gap_sum / static_cast<double>(points);
  if (mean_gap >= 0.01) {
    ok = false;
    detail = "mean gap " + std::to_string(100.0 * mean_gap) + "%";
  }
  {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "mean gap " << 100.0 * mean_gap << "%, worst point ";
    os.precision(2);
    os << worst_secs << "s";
    if (detail.empty()) detail = os.str();
  }
  report(5, "benchmark error gap", ok, detail);
}

// ---------------------------------------------------------------------------
// 6. Heuristic incumbents are bilevel-feasible and bounded below by the
// price-grid relaxation; the centralized bound corrects the comparison.
void criterion_heuristic() {
  std::mt19937_64 gen(6006);
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    ProblemInstance inst = random_instance(gen, 3, 2, 2);
    ScenarioSet sc = sample_scenarios(inst, 1 + (gen() % 4), 6100 + trial,
                                      SampleStream::kOptimization);
    double pen = default_penalty_upper_bound(inst);
    DecentralizedResult dec = heuristic_solve(inst, sc, pen, pen);
    if (!dec.found || !check_decentralized_feasible(inst, sc, dec)) {
      ok = false;
      detail = "infeasible incumbent at trial " + std::to_string(trial);
      break;
    }
    double lb = lower_bound_relaxation(inst, sc, pen, pen);
    double scale = 1.0 + std::abs(dec.objective);
    if (dec.objective < lb - 1e-6 * scale) {
      ok = false;
      detail = "incumbent below the relaxation at trial " +
               std::to_string(trial);
      break;
    }
    CentralizedResult cen = solve_centralized_fixed_penalty(inst, sc, pen, pen);
    if (cen.upper_bound > dec.objective + cen.delta_max + 1e-6 * scale) {
      ok = false;
      detail = "centralized bound exceeds the corrected decentralized cost "
               "at trial " +
               std::to_string(trial);
      break;
    }
  }
  report(6, "heuristic feasibility and bound structure", ok, detail);
}

// ---------------------------------------------------------------------------
// 7. Statistical machinery: exact small-n binomial agreement, quantile
// round trips, a clean certificate on a robust plan, and coverage of the
// order-statistic lower bound on a solvable oracle instance.
void criterion_validation() {
  bool ok = true;
  std::string detail;

  // binomial cdf against direct summation
  std::mt19937_64 gen(7007);
  std::uniform_real_distribution<double> up(0.01, 0.99);
  for (int trial = 0; trial < 300 && ok; ++trial) {
    std::size_t n = 1 + gen() % 20;
    std::size_t k = gen() % (n + 1);
    double p = up(gen);
    double direct = 0.0;
    for (std::size_t j = 0; j <= k && j <= n; ++j) {
      double coeff = 1.0;
      for (std::size_t r = 0; r < j; ++r) {
        coeff *= static_cast<double>(n - r) / static_cast<double>(j - r);
      }
      direct += coeff * std::pow(p, static_cast<double>(j)) *
                std::pow(1.0 - p, static_cast<double>(n - j));
    }
    direct = std::min(direct, 1.0);
    if (std::abs(binomial_cdf(k, p, n) - direct) > 1e-12) {
      ok = false;
      detail = "binomial cdf mismatch";
    }
  }

  // quantile round trip
  for (double p : {0.001, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999}) {
    if (std::abs(normal_cdf(normal_quantile(p)) - p) > 1e-9) {
      ok = false;
      detail = "quantile round trip failed at p=" + std::to_string(p);
    }
  }

  // oracle instance: degenerate ash far below the limit, uniform heat
  BiomassType bt;
  bt.id = "b";
  bt.ash_dist = {0.5, 0.5, 0.5};
  bt.heat_dist = {10.0, 20.0};
  bt.efficiency = 1.0;
  bt.processing_storage = 0.0;
  bt.transport_fixed = 0.0;
  bt.transport_variable = 0.0;
  Supplier s;
  s.id = "s";
  s.distance = 0.0;
  s.curves.push_back(SupplyCurve{{{0.0, 1e7, 30.0}}});
  ProblemInstance inst;
  inst.biomass.push_back(bt);
  inst.suppliers.push_back(s);
  inst.refinery.ash_limit = 1.0;
  inst.refinery.thermal_requirement = 100.0;
  inst.refinery.risk_ash = inst.refinery.risk_thermal = 0.05;
  inst.refinery.inner_risk_ash = inst.refinery.inner_risk_thermal = 0.0;

  // a plan covering the worst-case heat certifies with zero upper bounds
  if (ok) {
    std::vector<std::vector<double>> plan{{10.0}};
    FeasibilityCertificate cert =
        posterior_feasibility(inst, plan, 500, 7, 0.05);
    if (cert.ash_upper != 0.0 || cert.heat_upper != 0.0 || !cert.ash_ok ||
        !cert.heat_ok) {
      ok = false;
      detail = "robust plan did not certify cleanly";
    }
  }

  // coverage: the order-statistic bound undershoots the true optimum in at
  // least 93 of 100 trials (per-trial failure mass is ~1.2%)
  if (ok) {
    double q = 10.0 + 0.05 * 10.0;  // 5% quantile of uniform(10,20) heat
    double true_opt = 30.0 * inst.refinery.thermal_requirement / q;
    int valid = 0;
    for (int trial = 0; trial < 100; ++trial) {
      LowerBoundReport rep =
          saa_lower_bound(inst, 10, 10, 9000 + trial, 0.05);
      if (!rep.defined) continue;
      if (rep.bound <= true_opt + 1e-9 * true_opt) ++valid;
    }
    if (valid < 93) {
      ok = false;
      detail = "only " + std::to_string(valid) + "/100 trials valid";
    } else if (detail.empty()) {
      detail = std::to_string(valid) + "/100 trials valid";
    }
  }
  report(7, "statistical validation machinery", ok, detail);
}

// ---------------------------------------------------------------------------
// 8. CLI determinism: identical report bytes across repeated runs, including
// under different worker-pool sizes.
#ifndef BLEND_CLI_PATH
#define BLEND_CLI_PATH "./blend"
#endif

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool run_cmd(const std::string& cmd) { return std::system(cmd.c_str()) == 0; }

void criterion_cli_determinism() {
  namespace fs = std::filesystem;
  bool ok = true;
  std::string detail;
  fs::path root = fs::temp_directory_path() /
                  ("blend_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::string cli = "\"" BLEND_CLI_PATH "\"";
  auto dir = [&](const std::string& name) {
    fs::path d = root / name;
    fs::create_directories(d);
    return d.string();
  };

  std::string inst_a = dir("inst_a"), inst_b = dir("inst_b");
  std::string quiet = " > /dev/null 2>&1";
  ok = ok && run_cmd(cli + " gen-synthetic --suppliers-count 3"
                           " --biomass-count 2 --brackets 2 --seed 42"
                           " --demand 0.3 --out " + inst_a + quiet);
  ok = ok && run_cmd(cli + " gen-synthetic --suppliers-count 3"
                           " --biomass-count 2 --brackets 2 --seed 42"
                           " --demand 0.3 --out " + inst_b + quiet);
  if (!ok) detail = "gen-synthetic failed";
  for (const char* f :
       {"suppliers.csv", "biomass.csv", "supply_curves.csv", "refinery.csv"}) {
    if (ok && slurp(fs::path(inst_a) / f) != slurp(fs::path(inst_b) / f)) {
      ok = false;
      detail = std::string("gen-synthetic differs in ") + f;
    }
  }

  std::string files = " --suppliers " + inst_a + "/suppliers.csv" +
                      " --biomass " + inst_a + "/biomass.csv" +
                      " --curves " + inst_a + "/supply_curves.csv" +
                      " --refinery " + inst_a + "/refinery.csv";

  struct Verb {
    std::string name;
    std::string args;
    std::vector<std::string> outputs;
  };
  std::vector<Verb> verbs = {
      {"solve-centralized", files + " --n 15 --seed 7 --demand 0.3",
       {"blend_report.tsv", "summary.json", "scenarios.csv"}},
      {"solve-decentralized", files + " --n 10 --seed 7 --demand 0.3",
       {"blend_report.tsv", "summary.json"}},
      {"gap", files + " --n 8 --seed 7 --demand 0.3 --reps 2",
       {"gap_report.tsv"}},
      {"validate", files + " --n 10 --n-check 50 --m 4 --delta 0.05 --seed 7",
       {"validate_report.tsv", "lower_bound.tsv", "summary.json"}},
      {"site", " --suppliers " + inst_a + "/suppliers.csv",
       {"site.tsv"}},
  };
  for (const Verb& v : verbs) {
    if (!ok) break;
    std::string da = dir(v.name + "_a"), db = dir(v.name + "_b");
    // serial run vs a four-worker run must agree byte for byte
    if (!run_cmd("BLEND_WORKERS=1 " + cli + " " + v.name + v.args +
                 " --out " + da + quiet) ||
        !run_cmd("BLEND_WORKERS=4 " + cli + " " + v.name + v.args +
                 " --out " + db + quiet)) {
      ok = false;
      detail = v.name + " failed";
      break;
    }
    for (const std::string& f : v.outputs) {
      std::string a = slurp(fs::path(da) / f), b = slurp(fs::path(db) / f);
      if (a.empty() || a != b) {
        ok = false;
        detail = v.name + " differs in " + f;
        break;
      }
    }
  }
  fs::remove_all(root);
  report(8, "CLI determinism across runs and worker counts", ok, detail);
}

}  // namespace

int main() {
  criterion_follower();
  criterion_kkt();
  criterion_centralized_bounds();
  criterion_penalty_search();
  criterion_benchmark();
  criterion_heuristic();
  criterion_validation();
  criterion_cli_determinism();
  if (g_failures == 0) {
    std::cout << "all criteria passed" << std::endl;
    return 0;
  }
  std::cout << g_failures << " criterion(s) failed" << std::endl;
  return 1;
}

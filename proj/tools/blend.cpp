// Command-line front end: ingestion, siting, solves, gap experiments, and
// statistical validation. All tables are tab-separated and deterministic for
// a fixed configuration; wall-clock timings go to a separate log file.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blend/centralized.hpp"
#include "blend/decentralized.hpp"
#include "blend/io.hpp"
#include "blend/model.hpp"
#include "blend/sampling.hpp"
#include "blend/validation.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitValidate = 3;
constexpr int kExitSolve = 4;

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::size_t worker_count() {
  const char* env = std::getenv("BLEND_WORKERS");
  if (!env) return 1;
  long n = std::atol(env);
  return n >= 1 ? static_cast<std::size_t>(n) : 1;
}

// Runs `body(k)` for k in [0, n) on the configured worker pool. Results must
// be written to preallocated slots so output order is deterministic.
template <typename Body>
void parallel_for(std::size_t n, const Body& body) {
  std::size_t workers = std::min(worker_count(), n == 0 ? std::size_t{1} : n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t k = next.fetch_add(1);
        if (k >= n) return;
        try {
          body(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct InstanceOptions {
  std::string suppliers_file, biomass_file, curves_file, refinery_file;

  void attach(CLI::App* cmd) {
    cmd->add_option("--suppliers", suppliers_file, "suppliers csv")
        ->required();
    cmd->add_option("--biomass", biomass_file, "biomass csv")->required();
    cmd->add_option("--curves", curves_file, "supply curve csv")->required();
    cmd->add_option("--refinery", refinery_file, "refinery csv")->required();
  }

  blend::ProblemInstance load() const {
    blend::ProblemInstance inst;
    inst.suppliers = blend::read_suppliers(suppliers_file);
    inst.biomass = blend::read_biomass(biomass_file);
    blend::read_supply_curves(curves_file, inst.suppliers, inst.biomass);
    inst.refinery = blend::read_refinery(refinery_file);
    inst.validate();
    return inst;
  }
};

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error(p.string() + ": cannot write");
  return out;
}

std::vector<std::vector<double>> totals(const blend::ProblemInstance& inst,
                                        const blend::BlendSolution& sol) {
  std::vector<std::vector<double>> q(
      inst.num_suppliers(), std::vector<double>(inst.num_biomass(), 0.0));
  for (std::size_t i = 0; i < inst.num_suppliers(); ++i) {
    for (std::size_t b = 0; b < inst.num_biomass(); ++b) {
      q[i][b] = sol.total_quantity(i, b);
    }
  }
  return q;
}

std::vector<double> blend_percentages(
    const blend::ProblemInstance& inst,
    const std::vector<std::vector<double>>& quantity) {
  std::vector<double> per_b(inst.num_biomass(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < inst.num_suppliers(); ++i) {
    for (std::size_t b = 0; b < inst.num_biomass(); ++b) {
      per_b[b] += quantity[i][b];
      total += quantity[i][b];
    }
  }
  if (total > 0.0) {
    for (double& v : per_b) v = 100.0 * v / total;
  }
  return per_b;
}

double total_tons(const std::vector<std::vector<double>>& quantity) {
  double t = 0.0;
  for (const auto& row : quantity) {
    for (double v : row) t += v;
  }
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chance-constrained biomass blending toolkit"};
  app.require_subcommand(1);

  // --- gen-synthetic ---------------------------------------------------
  auto* gen = app.add_subcommand("gen-synthetic",
                                 "write a synthetic benchmark instance");
  std::size_t gen_suppliers = 6, gen_biomass = 4, gen_brackets = 3;
  std::uint64_t gen_seed = 1;
  double gen_demand = 0.3;
  std::string gen_out = ".";
  gen->add_option("--suppliers-count", gen_suppliers, "number of suppliers");
  gen->add_option("--biomass-count", gen_biomass, "number of biomass types");
  gen->add_option("--brackets", gen_brackets, "price brackets per curve");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--demand", gen_demand, "demand level, million dry tons");
  gen->add_option("--out", gen_out, "output directory")->required();

  // --- site -------------------------------------------------------------
  auto* site = app.add_subcommand("site", "1-median refinery siting");
  std::string site_suppliers, site_out = ".";
  std::vector<double> site_weights;
  site->add_option("--suppliers", site_suppliers, "suppliers csv")
      ->required();
  site->add_option("--weights", site_weights,
                   "per-supplier weights (default: uniform)");
  site->add_option("--out", site_out, "output directory")->required();

  // --- solve verbs shared options ---------------------------------------
  InstanceOptions cen_files, dec_files, gap_files, val_files;
  std::size_t cen_n = 50, dec_n = 50, gap_n = 40, val_n = 50;
  std::uint64_t cen_seed = 1, dec_seed = 1, gap_seed = 1, val_seed = 1;
  std::vector<double> cen_demand, dec_demand, gap_demand;
  std::string cen_out, dec_out, gap_out, val_out;
  std::size_t dec_patience = 5;
  std::size_t gap_reps = 1;
  std::size_t val_ncheck = 1000, val_m = 20;
  double val_delta = 0.05;

  auto* cen = app.add_subcommand("solve-centralized",
                                 "penalized SAA solve with binary search");
  cen_files.attach(cen);
  cen->add_option("--n", cen_n, "scenario count");
  cen->add_option("--seed", cen_seed, "sampling seed");
  cen->add_option("--demand", cen_demand,
                  "demand sweep, million dry tons (overrides tau)");
  cen->add_option("--out", cen_out, "output directory")->required();

  auto* dec = app.add_subcommand("solve-decentralized",
                                 "price-raising heuristic solve");
  dec_files.attach(dec);
  dec->add_option("--n", dec_n, "scenario count");
  dec->add_option("--seed", dec_seed, "sampling seed");
  dec->add_option("--demand", dec_demand,
                  "demand sweep, million dry tons (overrides tau)");
  dec->add_option("--patience", dec_patience, "non-improving steps allowed");
  dec->add_option("--out", dec_out, "output directory")->required();

  auto* gap = app.add_subcommand(
      "gap", "paired centralized/decentralized gap experiment");
  gap_files.attach(gap);
  gap->add_option("--n", gap_n, "scenario count");
  gap->add_option("--seed", gap_seed, "base sampling seed");
  gap->add_option("--demand", gap_demand, "demand sweep, million dry tons");
  gap->add_option("--reps", gap_reps, "replications per demand level");
  gap->add_option("--out", gap_out, "output directory")->required();

  auto* val = app.add_subcommand("validate",
                                 "posterior feasibility and lower bound");
  val_files.attach(val);
  val->add_option("--n", val_n, "scenario count for the solve");
  val->add_option("--n-check", val_ncheck, "fresh check sample size");
  val->add_option("--m", val_m, "lower-bound replications");
  val->add_option("--delta", val_delta, "confidence level");
  val->add_option("--seed", val_seed, "sampling seed");
  val->add_option("--out", val_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitParse;
  }

  try {
    if (gen->parsed()) {
      std::filesystem::create_directories(gen_out);
      blend::ProblemInstance inst = blend::gen_synthetic(
          gen_suppliers, gen_biomass, gen_brackets, gen_seed, gen_demand);
      std::filesystem::path dir(gen_out);
      blend::write_suppliers((dir / "suppliers.csv").string(),
                             inst.suppliers);
      blend::write_biomass((dir / "biomass.csv").string(), inst.biomass);
      blend::write_supply_curves((dir / "supply_curves.csv").string(),
                                 inst.suppliers, inst.biomass);
      blend::write_refinery((dir / "refinery.csv").string(), inst.refinery);
      std::cout << "wrote instance with " << inst.num_suppliers()
                << " suppliers, " << inst.num_biomass() << " biomass types to "
                << gen_out << "\n";
      return 0;
    }

    if (site->parsed()) {
      std::vector<blend::Supplier> sup = blend::read_suppliers(site_suppliers);
      std::vector<double> w = site_weights;
      if (w.empty()) w.assign(sup.size(), 1.0);
      std::size_t c = blend::site_refinery(sup, w);
      std::filesystem::create_directories(site_out);
      std::ofstream out =
          open_out(std::filesystem::path(site_out) / "site.tsv");
      out << "supplier\tx\ty\n";
      out << sup[c].id << '\t' << fmt(sup[c].x) << '\t' << fmt(sup[c].y)
          << '\n';
      std::cout << "site: " << sup[c].id << " at (" << fmt(sup[c].x) << ", "
                << fmt(sup[c].y) << ")\n";
      return 0;
    }

    if (cen->parsed()) {
      blend::ProblemInstance base = cen_files.load();
      std::filesystem::create_directories(cen_out);
      std::filesystem::path dir(cen_out);
      if (cen_demand.empty()) {
        cen_demand.push_back(base.refinery.thermal_requirement /
                             blend::kThermalPerMdt);
      }
      blend::ScenarioSet scen = blend::sample_scenarios(
          base, cen_n, cen_seed, blend::SampleStream::kOptimization);
      blend::write_scenarios((dir / "scenarios.csv").string(), base, scen);

      std::vector<blend::SearchResult> results(cen_demand.size());
      std::vector<double> times(cen_demand.size(), 0.0);
      parallel_for(cen_demand.size(), [&](std::size_t k) {
        blend::ProblemInstance inst = base;
        inst.refinery.thermal_requirement =
            cen_demand[k] * blend::kThermalPerMdt;
        Timer t;
        results[k] = blend::saa_binary_search(inst, scen);
        times[k] = t.seconds();
      });

      std::ofstream rep = open_out(dir / "blend_report.tsv");
      rep << "demand_mdt\ttotal_cost_kusd\tcost_per_dt\terror_gap_pct\t"
             "ash_violations\theat_violations";
      for (const auto& b : base.biomass) rep << '\t' << b.id << "_pct";
      rep << '\n';
      nlohmann::json summary = nlohmann::json::array();
      std::ofstream log = open_out(dir / "timings.log");
      for (std::size_t k = 0; k < cen_demand.size(); ++k) {
        const blend::CentralizedResult& r = results[k].result;
        auto q = totals(base, r.solution);
        auto pct = blend_percentages(base, q);
        double tons = total_tons(q);
        rep << fmt(cen_demand[k]) << '\t' << fmt(r.upper_bound / 1000.0)
            << '\t' << fmt(tons > 0.0 ? r.upper_bound / tons : 0.0) << '\t'
            << fmt(100.0 * r.error_gap) << '\t' << r.ash_violations << '\t'
            << r.heat_violations;
        for (double v : pct) rep << '\t' << fmt(v, 2);
        rep << '\n';
        summary.push_back({{"demand_mdt", cen_demand[k]},
                           {"upper_bound", r.upper_bound},
                           {"lower_bound", r.lower_bound},
                           {"error_gap", r.error_gap},
                           {"lambda", r.penalties.lambda},
                           {"mu", r.penalties.mu},
                           {"ash_violations", r.ash_violations},
                           {"heat_violations", r.heat_violations},
                           {"delta_max", r.delta_max}});
        log << "level " << fmt(cen_demand[k]) << ": " << fmt(times[k])
            << " s\n";
      }
      std::ofstream js = open_out(dir / "summary.json");
      js << summary.dump(2) << '\n';
      std::cout << "wrote " << (dir / "blend_report.tsv").string() << "\n";
      return 0;
    }

    if (dec->parsed()) {
      blend::ProblemInstance base = dec_files.load();
      std::filesystem::create_directories(dec_out);
      std::filesystem::path dir(dec_out);
      if (dec_demand.empty()) {
        dec_demand.push_back(base.refinery.thermal_requirement /
                             blend::kThermalPerMdt);
      }
      blend::ScenarioSet scen = blend::sample_scenarios(
          base, dec_n, dec_seed, blend::SampleStream::kOptimization);
      blend::write_scenarios((dir / "scenarios.csv").string(), base, scen);

      std::vector<blend::DecentralizedResult> results(dec_demand.size());
      std::vector<double> times(dec_demand.size(), 0.0);
      parallel_for(dec_demand.size(), [&](std::size_t k) {
        blend::ProblemInstance inst = base;
        inst.refinery.thermal_requirement =
            dec_demand[k] * blend::kThermalPerMdt;
        double penalty = blend::default_penalty_upper_bound(inst);
        Timer t;
        results[k] = blend::heuristic_solve(inst, scen, penalty, penalty,
                                            dec_patience);
        times[k] = t.seconds();
      });

      std::ofstream rep = open_out(dir / "blend_report.tsv");
      rep << "demand_mdt\tobjective_kusd\tcost_per_dt\tash_violations\t"
             "heat_violations";
      for (const auto& b : base.biomass) rep << '\t' << b.id << "_pct";
      rep << '\n';
      nlohmann::json summary = nlohmann::json::array();
      std::ofstream log = open_out(dir / "timings.log");
      for (std::size_t k = 0; k < dec_demand.size(); ++k) {
        const blend::DecentralizedResult& r = results[k];
        if (!r.found) {
          throw std::runtime_error("heuristic found no feasible incumbent");
        }
        auto pct = blend_percentages(base, r.quantity);
        double tons = total_tons(r.quantity);
        rep << fmt(dec_demand[k]) << '\t' << fmt(r.objective / 1000.0) << '\t'
            << fmt(tons > 0.0 ? r.objective / tons : 0.0) << '\t'
            << r.ash_violations << '\t' << r.heat_violations;
        for (double v : pct) rep << '\t' << fmt(v, 2);
        rep << '\n';
        nlohmann::json prices = nlohmann::json::array();
        for (double p : r.prices.price) prices.push_back(p);
        summary.push_back({{"demand_mdt", dec_demand[k]},
                           {"objective", r.objective},
                           {"prices", prices},
                           {"trace_length", r.trace.size()},
                           {"ash_violations", r.ash_violations},
                           {"heat_violations", r.heat_violations}});
        log << "level " << fmt(dec_demand[k]) << ": " << fmt(times[k])
            << " s\n";
      }
      std::ofstream js = open_out(dir / "summary.json");
      js << summary.dump(2) << '\n';
      std::cout << "wrote " << (dir / "blend_report.tsv").string() << "\n";
      return 0;
    }

    if (gap->parsed()) {
      blend::ProblemInstance base = gap_files.load();
      std::filesystem::create_directories(gap_out);
      std::filesystem::path dir(gap_out);
      if (gap_demand.empty()) {
        gap_demand.push_back(base.refinery.thermal_requirement /
                             blend::kThermalPerMdt);
      }
      struct Cell {
        double cen = 0.0, dec = 0.0, delta_max = 0.0, seconds = 0.0;
      };
      std::size_t cells = gap_demand.size() * gap_reps;
      std::vector<Cell> grid(cells);
      parallel_for(cells, [&](std::size_t k) {
        std::size_t level = k / gap_reps;
        std::size_t rep_idx = k % gap_reps;
        blend::ProblemInstance inst = base;
        inst.refinery.thermal_requirement =
            gap_demand[level] * blend::kThermalPerMdt;
        std::uint64_t seed =
            blend::rng::mix(gap_seed + (rep_idx + 1) * blend::rng::kGamma);
        blend::ScenarioSet scen = blend::sample_scenarios(
            inst, gap_n, seed, blend::SampleStream::kOptimization);
        Timer t;
        blend::SearchResult cen_r = blend::saa_binary_search(inst, scen);
        double penalty = blend::default_penalty_upper_bound(inst);
        blend::DecentralizedResult dec_r = blend::heuristic_solve(
            inst, scen, penalty, penalty, dec_patience);
        if (!dec_r.found) {
          throw std::runtime_error("heuristic found no feasible incumbent");
        }
        grid[k] = {cen_r.result.upper_bound, dec_r.objective,
                   cen_r.result.delta_max, t.seconds()};
      });

      std::ofstream rep = open_out(dir / "gap_report.tsv");
      rep << "demand_mdt\trep\tcentralized_kusd\tdecentralized_kusd\t"
             "gap_pct\tdelta_max_kusd\tcorrected_gap_pct\n";
      std::ofstream log = open_out(dir / "timings.log");
      for (std::size_t k = 0; k < cells; ++k) {
        std::size_t level = k / gap_reps;
        std::size_t rep_idx = k % gap_reps;
        const Cell& c = grid[k];
        double gap_pct = 100.0 * (c.dec - c.cen) / c.cen;
        double corrected = 100.0 * (c.dec + c.delta_max - c.cen) / c.cen;
        rep << fmt(gap_demand[level]) << '\t' << (rep_idx + 1) << '\t'
            << fmt(c.cen / 1000.0) << '\t' << fmt(c.dec / 1000.0) << '\t'
            << fmt(gap_pct) << '\t' << fmt(c.delta_max / 1000.0) << '\t'
            << fmt(corrected) << '\n';
        log << "level " << fmt(gap_demand[level]) << " rep " << (rep_idx + 1)
            << ": " << fmt(c.seconds) << " s\n";
      }
      std::cout << "wrote " << (dir / "gap_report.tsv").string() << "\n";
      return 0;
    }

    if (val->parsed()) {
      blend::ProblemInstance inst = val_files.load();
      std::filesystem::create_directories(val_out);
      std::filesystem::path dir(val_out);
      blend::ScenarioSet scen = blend::sample_scenarios(
          inst, val_n, val_seed, blend::SampleStream::kOptimization);
      blend::SearchResult solved = blend::saa_binary_search(inst, scen);
      auto q = totals(inst, solved.result.solution);
      blend::FeasibilityCertificate cert = blend::posterior_feasibility(
          inst, q, val_ncheck, val_seed, val_delta);
      blend::ScenarioSet check = blend::sample_scenarios(
          inst, val_ncheck, val_seed, blend::SampleStream::kValidation);
      blend::write_scenarios((dir / "check_scenarios.csv").string(), inst,
                             check);
      blend::LowerBoundReport lb =
          blend::saa_lower_bound(inst, val_n, val_m, val_seed, val_delta);

      std::ofstream rep = open_out(dir / "validate_report.tsv");
      rep << "n_check\tash_violations\tash_rate\tash_upper\tash_ok\t"
             "heat_violations\theat_rate\theat_upper\theat_ok\n";
      rep << cert.sample_size << '\t' << cert.ash_violations << '\t'
          << fmt(cert.ash_rate, 6) << '\t' << fmt(cert.ash_upper, 6) << '\t'
          << (cert.ash_ok ? 1 : 0) << '\t' << cert.heat_violations << '\t'
          << fmt(cert.heat_rate, 6) << '\t' << fmt(cert.heat_upper, 6) << '\t'
          << (cert.heat_ok ? 1 : 0) << '\n';

      std::ofstream lbrep = open_out(dir / "lower_bound.tsv");
      lbrep << "n\tm\tpi_ash\tpi_heat\torder_index\tdefined\tbound_kusd\t"
               "rep_min_kusd\trep_avg_kusd\trep_max_kusd\trep_std_kusd\t"
               "upper_kusd\n";
      double mn = 0.0, mx = 0.0, avg = 0.0, sd = 0.0;
      if (!lb.replication_values.empty()) {
        mn = lb.replication_values.front();
        mx = lb.replication_values.back();
        for (double v : lb.replication_values) avg += v;
        avg /= static_cast<double>(lb.replication_values.size());
        for (double v : lb.replication_values) sd += (v - avg) * (v - avg);
        sd = std::sqrt(sd /
                       static_cast<double>(lb.replication_values.size()));
      }
      lbrep << lb.sample_size << '\t' << lb.replications << '\t'
            << fmt(lb.pi_ash, 6) << '\t' << fmt(lb.pi_heat, 6) << '\t'
            << lb.order_index << '\t' << (lb.defined ? 1 : 0) << '\t'
            << fmt(lb.defined ? lb.bound / 1000.0 : 0.0) << '\t'
            << fmt(mn / 1000.0) << '\t' << fmt(avg / 1000.0) << '\t'
            << fmt(mx / 1000.0) << '\t' << fmt(sd / 1000.0) << '\t'
            << fmt(solved.result.upper_bound / 1000.0) << '\n';

      nlohmann::json summary = {
          {"upper_bound", solved.result.upper_bound},
          {"ash_upper", cert.ash_upper},
          {"heat_upper", cert.heat_upper},
          {"lower_bound_defined", lb.defined},
          {"lower_bound", lb.defined ? lb.bound : 0.0},
          {"order_index", lb.order_index}};
      std::ofstream js = open_out(dir / "summary.json");
      js << summary.dump(2) << '\n';
      std::cout << "wrote " << (dir / "validate_report.tsv").string() << "\n";
      return 0;
    }
  } catch (const blend::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidate;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidate;
  } catch (const std::exception& e) {
    std::cerr << "solve error: " << e.what() << "\n";
    return kExitSolve;
  }
  return 0;
}

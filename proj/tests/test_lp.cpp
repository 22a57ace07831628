#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "doctest.h"

#include "blend/bnb.hpp"
#include "blend/lp.hpp"

using namespace blend;

namespace {

// Independent oracle: enumerate all bases of the standard-form system
// [A | I][x; s] = b with x, s >= 0 and report the best feasible objective.
// Only valid for programs whose variables have bounds [0, inf) and whose
// rows are all <= with a bounding row that keeps the feasible set compact.
double enumerate_optimum(const LinearProgram& lp) {
  std::size_t n = lp.num_vars();
  std::size_t m = lp.rows.size();
  std::size_t total = n + m;
  std::vector<std::size_t> pick(m);
  double best = std::numeric_limits<double>::infinity();

  // column j of the standard-form matrix
  auto column = [&](std::size_t j, std::vector<double>& col) {
    col.assign(m, 0.0);
    if (j < n) {
      for (std::size_t r = 0; r < m; ++r) col[r] = lp.rows[r].coeffs[j];
    } else {
      col[j - n] = 1.0;
    }
  };

  std::vector<double> mat, rhs, col;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                          std::size_t depth) {
    if (depth == m) {
      // solve B x_B = b by Gaussian elimination with partial pivoting
      mat.assign(m * m, 0.0);
      rhs.assign(m, 0.0);
      for (std::size_t k = 0; k < m; ++k) {
        column(pick[k], col);
        for (std::size_t r = 0; r < m; ++r) mat[r * m + k] = col[r];
      }
      for (std::size_t r = 0; r < m; ++r) rhs[r] = lp.rows[r].rhs;
      for (std::size_t c = 0; c < m; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < m; ++r) {
          if (std::abs(mat[r * m + c]) > std::abs(mat[piv * m + c])) piv = r;
        }
        if (std::abs(mat[piv * m + c]) < 1e-11) return;  // singular basis
        if (piv != c) {
          for (std::size_t k = 0; k < m; ++k)
            std::swap(mat[c * m + k], mat[piv * m + k]);
          std::swap(rhs[c], rhs[piv]);
        }
        for (std::size_t r = 0; r < m; ++r) {
          if (r == c) continue;
          double f = mat[r * m + c] / mat[c * m + c];
          if (f == 0.0) continue;
          for (std::size_t k = c; k < m; ++k) mat[r * m + k] -= f * mat[c * m + k];
          rhs[r] -= f * rhs[c];
        }
      }
      double obj = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        double v = rhs[k] / mat[k * m + k];
        if (v < -1e-9) return;  // infeasible basic solution
        if (pick[k] < n) obj += lp.objective[pick[k]] * v;
      }
      best = std::min(best, obj);
      return;
    }
    for (std::size_t j = start; j + (m - depth) <= total; ++j) {
      pick[depth] = j;
      rec(j + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

LinearProgram random_le_program(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> coef(-1.0, 2.0);
  std::uniform_real_distribution<double> cost(-5.0, 5.0);
  std::uniform_real_distribution<double> rhs(1.0, 10.0);
  LinearProgram lp;
  for (int j = 0; j < 8; ++j) lp.add_variable(0.0, kInf, cost(gen));
  for (int r = 0; r < 4; ++r) {
    std::vector<double> row(8);
    for (auto& a : row) a = coef(gen);
    lp.add_row(std::move(row), RowSense::kLessEq, rhs(gen));
  }
  // bounding row keeps every program bounded; x = 0 keeps it feasible
  lp.add_row(std::vector<double>(8, 1.0), RowSense::kLessEq, 25.0);
  return lp;
}

}  // namespace

TEST_CASE("single-variable programs and dual sign convention") {
  // maximize x s.t. x <= 3, posed as min -x; binding <= row carries a
  // negative dual in the min form, so the max-form shadow price is 1.
  LinearProgram lp;
  lp.add_variable(0.0, kInf, -1.0);
  lp.add_row({1.0}, RowSense::kLessEq, 3.0);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(-3.0));
  CHECK(sol.duals[0] == doctest::Approx(-1.0));
  CHECK(-sol.duals[0] == doctest::Approx(1.0));
}

TEST_CASE("infeasible and unbounded detection") {
  LinearProgram lp;
  lp.add_variable(0.0, kInf, 1.0);
  lp.add_row({1.0}, RowSense::kLessEq, -1.0);  // x <= -1 with x >= 0
  CHECK(solve_lp(lp).status == LpStatus::kInfeasible);

  LinearProgram lp2;
  lp2.add_variable(0.0, kInf, -1.0);
  lp2.add_row({1.0}, RowSense::kGreaterEq, 1.0);
  CHECK(solve_lp(lp2).status == LpStatus::kUnbounded);

  // row-free program resolves at bounds
  LinearProgram lp3;
  lp3.add_variable(2.0, 5.0, 1.0);
  lp3.add_variable(0.0, 4.0, -2.0);
  LpSolution s3 = solve_lp(lp3);
  REQUIRE(s3.status == LpStatus::kOptimal);
  CHECK(s3.x[0] == doctest::Approx(2.0));
  CHECK(s3.x[1] == doctest::Approx(4.0));
  CHECK(s3.objective == doctest::Approx(-6.0));
}

TEST_CASE("equality rows and negative bounds") {
  // min j s.t. u - j = -5, u >= 0, j >= 0  ->  j = 5
  LinearProgram lp;
  std::size_t u = lp.add_variable(0.0, kInf, 0.0);
  std::size_t j = lp.add_variable(0.0, kInf, 3.0);
  std::vector<double> row(2, 0.0);
  row[u] = 1.0;
  row[j] = -1.0;
  lp.add_row(std::move(row), RowSense::kEqual, -5.0);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[u] == doctest::Approx(0.0));
  CHECK(sol.x[j] == doctest::Approx(5.0));
  CHECK(sol.objective == doctest::Approx(15.0));
}

TEST_CASE("random programs match basis enumeration oracle") {
  std::mt19937_64 gen(424242);
  for (int trial = 0; trial < 25; ++trial) {
    LinearProgram lp = random_le_program(gen);
    double oracle = enumerate_optimum(lp);
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-7));

    // primal feasibility at reported optimum
    for (std::size_t r = 0; r < lp.rows.size(); ++r) {
      double lhs = 0.0;
      for (std::size_t v = 0; v < lp.num_vars(); ++v)
        lhs += lp.rows[r].coeffs[v] * sol.x[v];
      CHECK(lhs <= lp.rows[r].rhs + 1e-6);
    }
    for (std::size_t v = 0; v < lp.num_vars(); ++v) CHECK(sol.x[v] >= -1e-8);

    // weak duality certificate: y <= 0 for <= rows, b'y == c'x
    double dual_obj = 0.0;
    for (std::size_t r = 0; r < lp.rows.size(); ++r) {
      CHECK(sol.duals[r] <= 1e-7);
      dual_obj += sol.duals[r] * lp.rows[r].rhs;
    }
    CHECK(dual_obj == doctest::Approx(sol.objective).epsilon(1e-6));
  }
}

TEST_CASE("optimum invariant under row permutation and rescaling") {
  std::mt19937_64 gen(777);
  std::uniform_real_distribution<double> scale(0.05, 50.0);
  for (int trial = 0; trial < 10; ++trial) {
    LinearProgram lp = random_le_program(gen);
    double base = solve_lp(lp).objective;

    LinearProgram perm = lp;
    std::shuffle(perm.rows.begin(), perm.rows.end(), gen);
    CHECK(solve_lp(perm).objective == doctest::Approx(base).epsilon(1e-8));

    LinearProgram scaled = lp;
    for (auto& row : scaled.rows) {
      double f = scale(gen);
      for (auto& a : row.coeffs) a *= f;
      row.rhs *= f;
    }
    CHECK(solve_lp(scaled).objective == doctest::Approx(base).epsilon(1e-7));
  }
}

TEST_CASE("degenerate program terminates") {
  // many redundant rows through the origin; Bland fallback must not cycle
  LinearProgram lp;
  for (int j = 0; j < 3; ++j) lp.add_variable(0.0, kInf, -1.0);
  lp.add_row({1.0, 1.0, 0.0}, RowSense::kLessEq, 0.0);
  lp.add_row({1.0, 0.0, 1.0}, RowSense::kLessEq, 0.0);
  lp.add_row({0.0, 1.0, 1.0}, RowSense::kLessEq, 0.0);
  lp.add_row({1.0, 1.0, 1.0}, RowSense::kLessEq, 0.0);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("bracket mip matches exhaustive assignment enumeration") {
  std::mt19937_64 gen(31337);
  std::uniform_real_distribution<double> cost(1.0, 20.0);
  for (int trial = 0; trial < 15; ++trial) {
    // two groups x two brackets each: 4 assignments to enumerate
    BracketMip mip;
    LinearProgram& lp = mip.lp;
    std::vector<std::array<double, 2>> lo(2), hi(2), price(2);
    std::vector<BracketGroup> groups(2);
    double budget = 120.0;
    for (int g = 0; g < 2; ++g) {
      lo[g] = {0.0, 40.0};
      hi[g] = {40.0, 100.0};
      price[g] = {cost(gen), cost(gen) + 25.0};
      for (int p = 0; p < 2; ++p) {
        std::size_t x = lp.add_variable(0.0, kInf, -price[g][p] * 0.0);
        std::size_t z = lp.add_variable(0.0, 1.0, 0.0);
        groups[g].x_vars.push_back(x);
        groups[g].z_vars.push_back(z);
      }
    }
    // objective: maximize value of purchased tonnage (negated)
    for (int g = 0; g < 2; ++g)
      for (int p = 0; p < 2; ++p)
        lp.objective[groups[g].x_vars[p]] = -(price[g][p]);
    // linking rows lo*z <= x <= hi*z and sum z = 1 per group
    for (int g = 0; g < 2; ++g) {
      std::vector<double> sum(lp.num_vars(), 0.0);
      for (int p = 0; p < 2; ++p) {
        std::vector<double> r1(lp.num_vars(), 0.0), r2(lp.num_vars(), 0.0);
        r1[groups[g].x_vars[p]] = -1.0;
        r1[groups[g].z_vars[p]] = lo[g][p];
        lp.add_row(std::move(r1), RowSense::kLessEq, 0.0);
        r2[groups[g].x_vars[p]] = 1.0;
        r2[groups[g].z_vars[p]] = -hi[g][p];
        lp.add_row(std::move(r2), RowSense::kLessEq, 0.0);
        sum[groups[g].z_vars[p]] = 1.0;
      }
      lp.add_row(std::move(sum), RowSense::kEqual, 1.0);
    }
    // shared budget row
    std::vector<double> bud(lp.num_vars(), 0.0);
    for (int g = 0; g < 2; ++g)
      for (int p = 0; p < 2; ++p) bud[groups[g].x_vars[p]] = 1.0;
    lp.add_row(std::move(bud), RowSense::kLessEq, budget);

    mip.groups = groups;
    MipResult res = solve_bracket_mip(mip);
    REQUIRE(res.found);

    // brute force: fix one bracket per group, solve the restricted LP
    double best = std::numeric_limits<double>::infinity();
    for (int p0 = 0; p0 < 2; ++p0) {
      for (int p1 = 0; p1 < 2; ++p1) {
        LinearProgram fixed = lp;
        int choice[2] = {p0, p1};
        for (int g = 0; g < 2; ++g) {
          for (int p = 0; p < 2; ++p) {
            double v = (p == choice[g]) ? 1.0 : 0.0;
            fixed.lower[groups[g].z_vars[p]] = v;
            fixed.upper[groups[g].z_vars[p]] = v;
            if (p != choice[g]) {
              fixed.upper[groups[g].x_vars[p]] = 0.0;
            }
          }
        }
        LpSolution s = solve_lp(fixed);
        if (s.status == LpStatus::kOptimal)
          best = std::min(best, s.objective);
      }
    }
    CHECK(res.objective == doctest::Approx(best).epsilon(1e-7));

    // relaxation bounds the mip from below
    LpSolution relax = solve_lp(lp);
    REQUIRE(relax.status == LpStatus::kOptimal);
    CHECK(relax.objective <= res.objective + 1e-7 * (1.0 + std::abs(best)));
  }
}

#pragma once

// Dense linear-programming core: bounded-variable primal simplex, two phases
// with artificial variables, explicit basis inverse with periodic
// refactorization. Dantzig pricing with a Bland fallback after a degenerate
// streak. Sized for desk-scale instances (a few hundred rows), dense algebra
// only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace blend {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kFeasTol = 1e-7;
inline constexpr double kOptTol = 1e-7;

enum class RowSense { kLessEq, kEqual, kGreaterEq };

struct LpRow {
  std::vector<double> coeffs;  // dense, one per structural variable
  RowSense sense = RowSense::kLessEq;
  double rhs = 0.0;
};

// min c'x  s.t.  rows,  lower <= x <= upper.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LpRow> rows;

  std::size_t num_vars() const { return objective.size(); }

  std::size_t add_variable(double lo, double hi, double cost) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    for (auto& r : rows) r.coeffs.push_back(0.0);
    return objective.size() - 1;
  }

  void add_row(std::vector<double> coeffs, RowSense sense, double rhs) {
    if (coeffs.size() != num_vars()) coeffs.resize(num_vars(), 0.0);
    rows.push_back({std::move(coeffs), sense, rhs});
  }

  void validate() const {
    for (std::size_t j = 0; j < num_vars(); ++j) {
      if (!(lower[j] <= upper[j])) {
        throw std::invalid_argument("variable " + std::to_string(j) +
                                    ": lower > upper");
      }
      if (!std::isfinite(objective[j])) {
        throw std::invalid_argument("non-finite objective coefficient");
      }
    }
    for (const auto& r : rows) {
      if (!std::isfinite(r.rhs)) {
        throw std::invalid_argument("non-finite right-hand side");
      }
      for (double a : r.coeffs) {
        if (!std::isfinite(a)) {
          throw std::invalid_argument("non-finite constraint coefficient");
        }
      }
    }
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  std::vector<double> x;              // primal values, structural variables
  std::vector<double> duals;          // one per row
  std::vector<double> reduced_costs;  // one per structural variable
  double objective = 0.0;
};

// Writes the program in CPLEX LP text format. Debugging aid for
// cross-checking against external solvers; nothing in the library reads it.
inline void export_lp(const LinearProgram& lp, std::ostream& os) {
  os << "Minimize\n obj:";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    double c = lp.objective[j];
    os << (c < 0 ? " - " : " + ") << std::abs(c) << " x" << j;
  }
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    os << " c" << r << ":";
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
      double a = lp.rows[r].coeffs[j];
      if (a == 0.0) continue;
      os << (a < 0 ? " - " : " + ") << std::abs(a) << " x" << j;
    }
    switch (lp.rows[r].sense) {
      case RowSense::kLessEq: os << " <= "; break;
      case RowSense::kEqual: os << " = "; break;
      case RowSense::kGreaterEq: os << " >= "; break;
    }
    os << lp.rows[r].rhs << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    if (lp.lower[j] == -kInf) {
      os << " -inf <= x" << j;
    } else {
      os << " " << lp.lower[j] << " <= x" << j;
    }
    if (lp.upper[j] == kInf) {
      os << " <= +inf\n";
    } else {
      os << " <= " << lp.upper[j] << "\n";
    }
  }
  os << "End\n";
}

namespace detail {

enum class VarState { kBasic, kAtLower, kAtUpper, kFree };

class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp) : lp_(lp) { build(); }

  LpSolution solve() {
    LpSolution out;
    if (!phase(/*phase1=*/true)) {
      out.status = LpStatus::kIterationLimit;
      return out;
    }
    double infeas = 0.0;
    for (std::size_t k = 0; k < m_; ++k) infeas += value_[art_begin_ + k];
    if (infeas > 1e3 * kFeasTol * (1.0 + bnorm_)) {
      out.status = LpStatus::kInfeasible;
      return out;
    }
    // Fix artificials at zero for phase 2.
    for (std::size_t j = art_begin_; j < ncols_; ++j) {
      lo_[j] = 0.0;
      up_[j] = 0.0;
    }
    drive_out_artificials();
    phase1_ = false;
    if (!phase(/*phase1=*/false)) {
      out.status = unbounded_ ? LpStatus::kUnbounded : LpStatus::kIterationLimit;
      return out;
    }
    extract(out);
    return out;
  }

 private:
  void build() {
    n_ = lp_.num_vars();
    m_ = lp_.rows.size();
    ncols_ = n_ + m_ + m_;  // structural + slack + artificial
    art_begin_ = n_ + m_;

    // Equilibration: row scaling by max-abs, then column scaling by max-abs
    // of the row-scaled matrix (structural columns only).
    row_scale_.assign(m_, 1.0);
    col_scale_.assign(n_, 1.0);
    for (std::size_t r = 0; r < m_; ++r) {
      double mx = 0.0;
      for (double a : lp_.rows[r].coeffs) mx = std::max(mx, std::abs(a));
      if (mx > 0.0) row_scale_[r] = 1.0 / mx;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      double mx = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        mx = std::max(mx, std::abs(lp_.rows[r].coeffs[j]) * row_scale_[r]);
      }
      if (mx > 0.0) col_scale_[j] = 1.0 / mx;
    }

    a_.assign(m_ * ncols_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t j = 0; j < n_; ++j) {
        at(r, j) = lp_.rows[r].coeffs[j] * row_scale_[r] * col_scale_[j];
      }
      at(r, n_ + r) = 1.0;  // slack
    }

    b_.resize(m_);
    bnorm_ = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      b_[r] = lp_.rows[r].rhs * row_scale_[r];
      bnorm_ = std::max(bnorm_, std::abs(b_[r]));
    }

    cost_.assign(ncols_, 0.0);
    lo_.assign(ncols_, 0.0);
    up_.assign(ncols_, kInf);
    for (std::size_t j = 0; j < n_; ++j) {
      cost_[j] = lp_.objective[j] * col_scale_[j];
      lo_[j] = lp_.lower[j] / col_scale_[j];
      up_[j] = lp_.upper[j] / col_scale_[j];
    }
    for (std::size_t r = 0; r < m_; ++r) {
      std::size_t s = n_ + r;
      switch (lp_.rows[r].sense) {
        case RowSense::kLessEq: lo_[s] = 0.0; up_[s] = kInf; break;
        case RowSense::kGreaterEq: lo_[s] = -kInf; up_[s] = 0.0; break;
        case RowSense::kEqual: lo_[s] = 0.0; up_[s] = 0.0; break;
      }
    }

    // Starting point: structural variables at their nearest finite bound
    // (lower preferred), slacks basic where the implied value fits their
    // bounds, artificials basic elsewhere.
    value_.assign(ncols_, 0.0);
    state_.assign(ncols_, VarState::kAtLower);
    for (std::size_t j = 0; j < n_; ++j) {
      if (lo_[j] > -kInf) {
        value_[j] = lo_[j];
        state_[j] = VarState::kAtLower;
      } else if (up_[j] < kInf) {
        value_[j] = up_[j];
        state_[j] = VarState::kAtUpper;
      } else {
        value_[j] = 0.0;
        state_[j] = VarState::kFree;
      }
    }
    std::vector<double> residual(b_);
    for (std::size_t j = 0; j < n_; ++j) {
      if (value_[j] == 0.0) continue;
      for (std::size_t r = 0; r < m_; ++r) residual[r] -= at(r, j) * value_[j];
    }
    basis_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      std::size_t s = n_ + r;
      std::size_t art = art_begin_ + r;
      if (residual[r] >= lo_[s] - kFeasTol && residual[r] <= up_[s] + kFeasTol) {
        basis_[r] = s;
        state_[s] = VarState::kBasic;
        value_[s] = residual[r];
        lo_[art] = up_[art] = 0.0;
        state_[art] = VarState::kAtLower;
      } else {
        double sval = residual[r] < lo_[s] ? lo_[s] : up_[s];
        value_[s] = sval;
        state_[s] = sval == lo_[s] ? VarState::kAtLower : VarState::kAtUpper;
        double rho = residual[r] - sval;
        at(r, art) = rho >= 0.0 ? 1.0 : -1.0;
        value_[art] = std::abs(rho);
        basis_[r] = art;
        state_[art] = VarState::kBasic;
        cost1_used_ = true;
      }
    }
    // Basis columns are slacks (+1) or signed artificials (-1/+1), so the
    // starting inverse is the diagonal of those signs, not the identity.
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      binv_[r * m_ + r] = at(r, basis_[r]);
    }
    phase1_ = true;
  }

  double& at(std::size_t r, std::size_t j) { return a_[r * ncols_ + j]; }
  double at(std::size_t r, std::size_t j) const { return a_[r * ncols_ + j]; }

  double phase_cost(std::size_t j) const {
    if (phase1_) return j >= art_begin_ ? 1.0 : 0.0;
    return j >= art_begin_ ? 0.0 : cost_[j];
  }

  // y = c_B' * Binv
  void compute_duals(std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      double cb = phase_cost(basis_[r]);
      if (cb == 0.0) continue;
      const double* row = &binv_[r * m_];
      for (std::size_t k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
  }

  double reduced_cost(std::size_t j, const std::vector<double>& y) const {
    double d = phase_cost(j);
    for (std::size_t r = 0; r < m_; ++r) {
      double arj = at(r, j);
      if (arj != 0.0) d -= y[r] * arj;
    }
    return d;
  }

  void ftran(std::size_t j, std::vector<double>& col) const {
    col.assign(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      double arj = at(r, j);
      if (arj == 0.0) continue;
      for (std::size_t k = 0; k < m_; ++k) col[k] += binv_[k * m_ + r] * arj;
    }
  }

  // Recompute Binv and basic values from scratch.
  void refactorize() {
    std::vector<double> mat(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t k = 0; k < m_; ++k) mat[k * m_ + r] = at(k, basis_[r]);
    }
    std::vector<double> inv(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) inv[r * m_ + r] = 1.0;
    // Gauss-Jordan with partial pivoting.
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m_; ++r) {
        if (std::abs(mat[r * m_ + col]) > std::abs(mat[piv * m_ + col])) piv = r;
      }
      if (std::abs(mat[piv * m_ + col]) < 1e-12) {
        throw std::runtime_error("simplex: singular basis");
      }
      if (piv != col) {
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(mat[piv * m_ + k], mat[col * m_ + k]);
          std::swap(inv[piv * m_ + k], inv[col * m_ + k]);
        }
      }
      double d = 1.0 / mat[col * m_ + col];
      for (std::size_t k = 0; k < m_; ++k) {
        mat[col * m_ + k] *= d;
        inv[col * m_ + k] *= d;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        double f = mat[r * m_ + col];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          mat[r * m_ + k] -= f * mat[col * m_ + k];
          inv[r * m_ + k] -= f * inv[col * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    recompute_basic_values();
  }

  void recompute_basic_values() {
    std::vector<double> rhs(b_);
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (state_[j] == VarState::kBasic || value_[j] == 0.0) continue;
      for (std::size_t r = 0; r < m_; ++r) {
        double arj = at(r, j);
        if (arj != 0.0) rhs[r] -= arj * value_[j];
      }
    }
    for (std::size_t r = 0; r < m_; ++r) {
      double v = 0.0;
      const double* row = &binv_[r * m_];
      for (std::size_t k = 0; k < m_; ++k) v += row[k] * rhs[k];
      value_[basis_[r]] = v;
    }
  }

  bool phase(bool phase1) {
    phase1_ = phase1;
    std::vector<double> y, col;
    std::size_t degenerate_streak = 0;
    std::size_t max_iter = 2000 + 200 * (m_ + n_);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
      if (pivots_since_refactor_ >= 64) {
        refactorize();
        pivots_since_refactor_ = 0;
      }
      compute_duals(y);
      bool bland = degenerate_streak > 2 * (m_ + 10);
      // Entering variable.
      std::size_t enter = ncols_;
      int dir = 0;
      double best = -kOptTol;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (state_[j] == VarState::kBasic) continue;
        if (!phase1 && j >= art_begin_) continue;
        if (lo_[j] == up_[j]) continue;  // fixed
        double d = reduced_cost(j, y);
        int cand = 0;
        if (state_[j] == VarState::kAtLower && d < -kOptTol) cand = +1;
        else if (state_[j] == VarState::kAtUpper && d > kOptTol) cand = -1;
        else if (state_[j] == VarState::kFree && std::abs(d) > kOptTol) {
          cand = d < 0 ? +1 : -1;
        }
        if (cand == 0) continue;
        if (bland) { enter = j; dir = cand; break; }
        double score = -std::abs(d);
        if (score < best) { best = score; enter = j; dir = cand; }
      }
      if (enter == ncols_) return true;  // optimal for this phase

      ftran(enter, col);
      // Ratio test: entering moves by dir * t, basics move by -col * dir * t.
      double tmax = up_[enter] - lo_[enter];  // bound flip span
      std::size_t leave_row = m_;
      int leave_to = 0;  // +1 leaves at lower, -1 at upper
      for (std::size_t r = 0; r < m_; ++r) {
        double delta = -col[r] * dir;  // basic value change per unit t
        std::size_t jb = basis_[r];
        if (delta < -1e-10) {
          if (lo_[jb] == -kInf) continue;
          double t = (lo_[jb] - value_[jb]) / delta;
          if (t < tmax - 1e-12) { tmax = t; leave_row = r; leave_to = +1; }
        } else if (delta > 1e-10) {
          if (up_[jb] == kInf) continue;
          double t = (up_[jb] - value_[jb]) / delta;
          if (t < tmax - 1e-12) { tmax = t; leave_row = r; leave_to = -1; }
        }
      }
      if (tmax == kInf) {
        unbounded_ = true;
        return false;
      }
      if (tmax < 0.0) tmax = 0.0;
      degenerate_streak = tmax < 1e-10 ? degenerate_streak + 1 : 0;

      // Apply step.
      value_[enter] += dir * tmax;
      for (std::size_t r = 0; r < m_; ++r) {
        value_[basis_[r]] -= col[r] * dir * tmax;
      }
      if (leave_row == m_) {
        // Bound flip, basis unchanged.
        state_[enter] =
            dir > 0 ? VarState::kAtUpper : VarState::kAtLower;
        continue;
      }
      std::size_t leave = basis_[leave_row];
      state_[leave] = leave_to > 0 ? VarState::kAtLower : VarState::kAtUpper;
      value_[leave] = leave_to > 0 ? lo_[leave] : up_[leave];
      basis_[leave_row] = enter;
      state_[enter] = VarState::kBasic;
      update_binv(col, leave_row);
      ++pivots_since_refactor_;
    }
    return false;  // iteration limit
  }

  void update_binv(const std::vector<double>& col, std::size_t prow) {
    double piv = col[prow];
    if (std::abs(piv) < 1e-11) {
      refactorize();
      pivots_since_refactor_ = 0;
      return;
    }
    double inv_piv = 1.0 / piv;
    for (std::size_t k = 0; k < m_; ++k) binv_[prow * m_ + k] *= inv_piv;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == prow) continue;
      double f = col[r];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m_; ++k) {
        binv_[r * m_ + k] -= f * binv_[prow * m_ + k];
      }
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < art_begin_) continue;
      std::vector<double> col;
      std::size_t pick = ncols_;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (state_[j] == VarState::kBasic) continue;
        ftran(j, col);
        if (std::abs(col[r]) > 1e-7) { pick = j; break; }
      }
      if (pick == ncols_) continue;  // redundant row, artificial stays at 0
      ftran(pick, col);
      std::size_t art = basis_[r];
      state_[art] = VarState::kAtLower;
      value_[art] = 0.0;
      basis_[r] = pick;
      state_[pick] = VarState::kBasic;
      update_binv(col, r);
      ++pivots_since_refactor_;
      recompute_basic_values();
    }
  }

  void extract(LpSolution& out) {
    refactorize();
    out.status = LpStatus::kOptimal;
    out.x.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) out.x[j] = value_[j] * col_scale_[j];
    std::vector<double> y;
    phase1_ = false;
    compute_duals(y);
    out.duals.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) out.duals[r] = y[r] * row_scale_[r];
    out.reduced_costs.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      out.reduced_costs[j] = reduced_cost(j, y) / col_scale_[j];
    }
    out.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      out.objective += lp_.objective[j] * out.x[j];
    }
  }

  const LinearProgram& lp_;
  std::size_t n_ = 0, m_ = 0, ncols_ = 0, art_begin_ = 0;
  std::vector<double> a_, b_, cost_, lo_, up_, value_;
  std::vector<double> binv_, row_scale_, col_scale_;
  std::vector<std::size_t> basis_;
  std::vector<VarState> state_;
  double bnorm_ = 0.0;
  bool phase1_ = true;
  bool unbounded_ = false;
  bool cost1_used_ = false;
  std::size_t pivots_since_refactor_ = 0;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp) {
  lp.validate();
  if (lp.rows.empty()) {
    // Pure bound problem: each variable sits at its cheaper bound.
    LpSolution out;
    out.status = LpStatus::kOptimal;
    out.x.resize(lp.num_vars());
    out.reduced_costs = lp.objective;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
      double c = lp.objective[j];
      double v = c >= 0.0 ? lp.lower[j] : lp.upper[j];
      if (!std::isfinite(v)) {
        if (c != 0.0) { out.status = LpStatus::kUnbounded; return out; }
        v = std::isfinite(lp.lower[j]) ? lp.lower[j]
            : std::isfinite(lp.upper[j]) ? lp.upper[j] : 0.0;
      }
      out.x[j] = v;
      out.objective += c * v;
    }
    return out;
  }
  detail::SimplexSolver solver(lp);
  LpSolution sol = solver.solve();
  if (sol.status == LpStatus::kIterationLimit) {
    throw std::runtime_error("simplex: iteration limit reached");
  }
  return sol;
}

}  // namespace blend

#pragma once

// Depth-first branch-and-bound over bracket indicator variables, with LP
// bounding. Intended as an exact oracle for desk-scale instances: each
// bracket group holds the X and Z variables of one (supplier, biomass) pair,
// and branching fixes the chosen bracket of one group per level. Ties are
// broken toward the lexicographically smallest Z assignment.

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "blend/lp.hpp"

namespace blend {

struct BracketGroup {
  std::vector<std::size_t> x_vars;  // one per bracket
  std::vector<std::size_t> z_vars;  // matching indicator, bounds [0,1] in lp
};

// lp must already contain the linking rows k_lo*Z <= X <= k_hi*Z and the
// sum-Z-equals-one row per group, with Z relaxed to [0,1].
struct BracketMip {
  LinearProgram lp;
  std::vector<BracketGroup> groups;
  std::size_t node_limit = 200000;
};

struct MipResult {
  LpSolution relaxation;              // root LP relaxation
  LpSolution incumbent;               // LP solution at best assignment
  std::vector<std::size_t> assignment;  // chosen bracket per group
  double objective = std::numeric_limits<double>::infinity();
  bool found = false;
  std::size_t nodes = 0;
};

namespace detail {

inline void fix_group(LinearProgram& lp, const BracketGroup& g,
                      std::size_t chosen) {
  for (std::size_t p = 0; p < g.z_vars.size(); ++p) {
    double v = p == chosen ? 1.0 : 0.0;
    lp.lower[g.z_vars[p]] = v;
    lp.upper[g.z_vars[p]] = v;
  }
}

inline void relax_group(LinearProgram& lp, const BracketGroup& g) {
  for (std::size_t z : g.z_vars) {
    lp.lower[z] = 0.0;
    lp.upper[z] = 1.0;
  }
}

inline void bnb_recurse(LinearProgram& lp, const BracketMip& mip,
                        std::size_t depth, std::vector<std::size_t>& partial,
                        MipResult& best) {
  if (++best.nodes > mip.node_limit) {
    throw std::runtime_error("bracket branch-and-bound: node limit exceeded");
  }
  LpSolution rel = solve_lp(lp);
  if (depth == 0) best.relaxation = rel;
  if (rel.status == LpStatus::kInfeasible) return;
  if (rel.status != LpStatus::kOptimal) {
    throw std::runtime_error("bracket branch-and-bound: LP not optimal");
  }
  if (best.found && rel.objective >= best.objective - 1e-9) return;  // prune
  if (depth == mip.groups.size()) {
    // All groups fixed; relaxation is the exact node value. Strict
    // improvement keeps the first (lexicographically smallest) tie.
    if (!best.found || rel.objective < best.objective - 1e-9) {
      best.found = true;
      best.objective = rel.objective;
      best.incumbent = rel;
      best.assignment = partial;
    }
    return;
  }
  const BracketGroup& g = mip.groups[depth];
  for (std::size_t p = 0; p < g.z_vars.size(); ++p) {
    fix_group(lp, g, p);
    partial.push_back(p);
    bnb_recurse(lp, mip, depth + 1, partial, best);
    partial.pop_back();
  }
  relax_group(lp, g);
}

}  // namespace detail

inline MipResult solve_bracket_mip(const BracketMip& mip) {
  MipResult best;
  LinearProgram lp = mip.lp;
  std::vector<std::size_t> partial;
  detail::bnb_recurse(lp, mip, 0, partial, best);
  return best;
}

}  // namespace blend

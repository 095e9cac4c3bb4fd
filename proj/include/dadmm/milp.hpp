#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dadmm/qp.hpp"
#include "dadmm/solver_config.hpp"

namespace dadmm {

struct RowEntry {
    int col;
    double coef;
};

// Ranged linear row: lo <= sum coef*x <= up.
struct LinearRow {
    std::vector<RowEntry> entries;
    double lo;
    double up;
};

// w approximates x*y; enforced exactly by spatial branching.
struct BilinearTerm {
    int x;
    int y;
    int w;
};

// min obj'x + offset over ranged rows, bounds, binaries and bilinear products.
struct MilpProblem {
    std::vector<double> obj;
    double obj_offset = 0.0;
    std::vector<double> lo;
    std::vector<double> up;
    std::vector<LinearRow> rows;
    std::vector<int> binaries;
    std::vector<BilinearTerm> bilinear;

    int num_vars() const { return static_cast<int>(obj.size()); }

    int add_var(double lo_v, double up_v, double obj_c = 0.0);
    int add_binary(double obj_c = 0.0);
    int add_row(std::vector<RowEntry> entries, double lo_r, double up_r);
    int add_eq_row(std::vector<RowEntry> entries, double rhs);
    int add_le_row(std::vector<RowEntry> entries, double rhs);
    void add_coeff(int row, int col, double coef);
    // registers w = x*y; x and y must have finite bounds
    void add_bilinear(int x, int y, int w);

    void check() const;
    // interval of a row's lhs over the variable box
    std::pair<double, double> row_activity_bounds(const LinearRow& row) const;
    double eval_row(const LinearRow& row, const std::vector<double>& x) const;

    // LP text-format dump for cross-checking against external solvers
    void write_lp(std::ostream& os, const std::string& name = "dadmm") const;
};

// LP solve (ignores binaries/bilinear must be empty): bounded-variable revised
// simplex with Bland's-rule fallback. Duals: eq_duals holds one multiplier per
// row (sign follows the active side), ineq_duals is unused.
SolveOutcome solve_lp(const MilpProblem& p, const SolverConfig& cfg = {});

// Branch and bound: binaries by most-fractional branching, bilinear terms by
// McCormick relaxation plus spatial bisection, best-bound node selection.
SolveOutcome solve_milp(const MilpProblem& p, const SolverConfig& cfg = {});

// Positions of the pieces a KKT reformulation adds to a MilpProblem.
struct KktBlock {
    int x0 = 0;        // n primal variables
    int nu0 = 0;       // equality multipliers (free, boxed by cfg.dual_bound)
    int lam0 = 0;      // inequality multipliers (>= 0)
    int phi0 = 0;      // one binary per canonical inequality
    int stat_row0 = 0; // n stationarity rows: Hx + g + A'nu + G'lam = 0
    int num_vars = 0;
    int num_ineq = 0;
};

// Embeds the KKT conditions of convex QP `p` into `m` using big-M
// complementarity. bigM has one entry per canonical inequality and must upper
// bound both the slack and the multiplier of that row. Any feasible point of
// the block is a global optimum of p. Upper-level parameters that enter the
// gradient linearly can be wired in afterwards via add_coeff on stat_row0+k.
KktBlock add_kkt_block(MilpProblem& m, const QpProblem& p, const Eigen::VectorXd& bigM,
                       const SolverConfig& cfg = {});

// Interval-propagated big-M candidates for add_kkt_block: slack bounds from
// the variable box, floored and capped per cfg.
Eigen::VectorXd propagate_big_m(const QpProblem& p, const SolverConfig& cfg = {});

}  // namespace dadmm

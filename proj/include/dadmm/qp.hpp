#pragma once

#include <Eigen/Dense>
#include <string>

#include "dadmm/solver_config.hpp"

namespace dadmm {

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit, time_limit };

std::string to_string(SolveStatus s);

struct SolveOutcome {
    SolveStatus status = SolveStatus::iteration_limit;
    Eigen::VectorXd x;
    Eigen::VectorXd eq_duals;    // one per equality row
    Eigen::VectorXd ineq_duals;  // canonical inequality order, >= 0
    double objective = 0.0;
    double gap = 0.0;            // MILP relative gap; 0 for LP/QP
    int iterations = 0;
    long nodes = 0;              // MILP only
};

// min 1/2 x'Hx + g'x  s.t.  a_eq x = b_eq,  a_in x <= b_in,  lo <= x <= up
struct QpProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd a_in;
    Eigen::VectorXd b_in;
    Eigen::VectorXd lo;
    Eigen::VectorXd up;
    double obj_offset = 0.0;

    int num_vars() const { return static_cast<int>(g.size()); }
    void check() const;  // throws std::invalid_argument on a violated invariant

    double objective_at(const Eigen::VectorXd& x) const {
        return 0.5 * x.dot(H * x) + g.dot(x) + obj_offset;
    }
};

// The canonical inequality system G x <= h: a_in rows, then finite upper
// bounds, then finite lower bounds (as -x <= -lo). solve_qp's ineq_duals and
// the KKT reformulation both follow this ordering.
void canonical_inequalities(const QpProblem& p, Eigen::MatrixXd& G, Eigen::VectorXd& h);

// Primal-dual interior point with Mehrotra predictor-corrector.
// status == optimal guarantees stationarity, feasibility and complementarity
// residuals <= cfg.kkt_tol * (1 + ||g||_inf) in the infinity norm.
SolveOutcome solve_qp(const QpProblem& p, const SolverConfig& cfg = {});

}  // namespace dadmm

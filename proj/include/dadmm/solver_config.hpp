#pragma once

#include <limits>

namespace dadmm {

// All solver tolerances live here so the kernels stay consistent with each other.
struct SolverConfig {
    double kkt_tol = 1e-8;        // QP residual tolerance (scaled by 1 + ||g||_inf)
    int qp_max_iter = 200;

    double lp_feas_tol = 1e-9;
    double lp_pivot_tol = 1e-10;
    int lp_refactor_every = 64;

    double milp_int_tol = 1e-6;
    double milp_gap_tol = 1e-4;
    double bilinear_tol = 1e-6;

    double bigm_floor = 1e3;
    double bigm_cap = 1e5;
    double dual_bound = 1e6;      // box on free multipliers inside KKT blocks

    double time_limit_s = std::numeric_limits<double>::infinity();
    long node_limit = 100000;
};

}  // namespace dadmm

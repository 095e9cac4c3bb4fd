#include "dadmm/qp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dadmm/milp.hpp"

namespace dadmm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void QpProblem::check() const {
    int n = num_vars();
    if (H.rows() != n || H.cols() != n) throw std::invalid_argument("qp: H dimension mismatch");
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + H.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("qp: H is not symmetric");
    if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n))
        throw std::invalid_argument("qp: equality system dimension mismatch");
    if (a_in.rows() != b_in.size() || (a_in.rows() > 0 && a_in.cols() != n))
        throw std::invalid_argument("qp: inequality system dimension mismatch");
    if (lo.size() != n || up.size() != n) throw std::invalid_argument("qp: bounds dimension mismatch");
    for (int j = 0; j < n; ++j)
        if (lo[j] > up[j] + 1e-12) throw std::invalid_argument("qp: lo > up");
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()),
                                                          Eigen::EigenvaluesOnly);
        double scale = 1.0 + H.cwiseAbs().maxCoeff();
        if (es.eigenvalues().minCoeff() < -1e-8 * scale)
            throw std::invalid_argument("qp: H is not positive semidefinite");
    }
}

namespace {

// LP feasibility certificate via the simplex phase 1.
bool qp_feasible(const QpProblem& p) {
    MilpProblem lp;
    int n = p.num_vars();
    for (int j = 0; j < n; ++j) lp.add_var(p.lo[j], p.up[j]);
    for (int e = 0; e < p.b_eq.size(); ++e) {
        std::vector<RowEntry> row;
        for (int j = 0; j < n; ++j)
            if (p.a_eq(e, j) != 0.0) row.push_back({j, p.a_eq(e, j)});
        lp.add_eq_row(std::move(row), p.b_eq[e]);
    }
    for (int i = 0; i < p.b_in.size(); ++i) {
        std::vector<RowEntry> row;
        for (int j = 0; j < n; ++j)
            if (p.a_in(i, j) != 0.0) row.push_back({j, p.a_in(i, j)});
        lp.add_le_row(std::move(row), p.b_in[i]);
    }
    return solve_lp(lp).status == SolveStatus::optimal;
}

struct InternalSystem {
    Eigen::MatrixXd A;  // equalities: original + fixed variables
    Eigen::VectorXd b;
    Eigen::MatrixXd G;  // strict inequalities (canonical rows minus fixed-bound rows)
    Eigen::VectorXd h;
    std::vector<int> canon_of_row;  // internal ineq row -> canonical index
    std::vector<int> fixed_var;     // appended equality row e (>= me) -> variable
    int me = 0;                     // original equality count
    int canon_rows = 0;
};

InternalSystem build_system(const QpProblem& p) {
    InternalSystem sys;
    int n = p.num_vars();
    sys.me = static_cast<int>(p.b_eq.size());

    std::vector<int> fixed;
    for (int j = 0; j < n; ++j)
        if (std::isfinite(p.lo[j]) && std::isfinite(p.up[j]) && p.up[j] - p.lo[j] < 1e-12)
            fixed.push_back(j);

    Eigen::MatrixXd Gc;
    Eigen::VectorXd hc;
    canonical_inequalities(p, Gc, hc);
    sys.canon_rows = static_cast<int>(hc.size());

    // canonical order is a_in rows, then finite upper bounds, then finite lower
    // bounds; recover which variable each bound row belongs to
    int m_in = static_cast<int>(p.b_in.size());
    std::vector<int> row_var(sys.canon_rows, -1);
    {
        int r = m_in;
        for (int j = 0; j < n; ++j)
            if (std::isfinite(p.up[j])) row_var[r++] = j;
        for (int j = 0; j < n; ++j)
            if (std::isfinite(p.lo[j])) row_var[r++] = j;
    }
    std::vector<bool> is_fixed_var(n, false);
    for (int j : fixed) is_fixed_var[j] = true;

    std::vector<int> keep;
    for (int r = 0; r < sys.canon_rows; ++r)
        if (row_var[r] < 0 || !is_fixed_var[row_var[r]]) keep.push_back(r);

    sys.G.resize(keep.size(), n);
    sys.h.resize(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        sys.G.row(k) = Gc.row(keep[k]);
        sys.h[k] = hc[keep[k]];
        sys.canon_of_row.push_back(keep[k]);
    }

    sys.A.resize(sys.me + fixed.size(), n);
    sys.b.resize(sys.me + fixed.size());
    if (sys.me > 0) {
        sys.A.topRows(sys.me) = p.a_eq;
        sys.b.head(sys.me) = p.b_eq;
    }
    for (std::size_t k = 0; k < fixed.size(); ++k) {
        sys.A.row(sys.me + k).setZero();
        sys.A(sys.me + k, fixed[k]) = 1.0;
        sys.b[sys.me + k] = p.lo[fixed[k]];
        sys.fixed_var.push_back(fixed[k]);
    }
    return sys;
}

}  // namespace

SolveOutcome solve_qp(const QpProblem& p, const SolverConfig& cfg) {
    int n = p.num_vars();
    if (p.H.rows() != n || p.H.cols() != n || p.lo.size() != n || p.up.size() != n ||
        p.a_eq.rows() != p.b_eq.size() || p.a_in.rows() != p.b_in.size())
        throw std::invalid_argument("qp: dimension mismatch");
    SolveOutcome out;

    InternalSystem sys = build_system(p);
    int me = static_cast<int>(sys.b.size());
    int mi = static_cast<int>(sys.h.size());
    const double scale = 1.0 + p.g.lpNorm<Eigen::Infinity>();
    const double tol = cfg.kkt_tol * scale;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(me);
    Eigen::VectorXd lam = Eigen::VectorXd::Ones(mi);
    Eigen::VectorXd s(mi);
    for (int i = 0; i < mi; ++i) {
        double slack = sys.h[i] - sys.G.row(i).dot(x);
        s[i] = std::max(1.0, std::abs(slack));
    }

    auto finish_optimal = [&](const Eigen::VectorXd& xv, const Eigen::VectorXd& yv,
                              const Eigen::VectorXd& lamv, int iters) {
        out.status = SolveStatus::optimal;
        out.x = xv;
        out.objective = p.objective_at(xv);
        out.iterations = iters;
        out.eq_duals = yv.head(sys.me);
        out.ineq_duals = Eigen::VectorXd::Zero(sys.canon_rows);
        for (int i = 0; i < mi; ++i) out.ineq_duals[sys.canon_of_row[i]] = lamv[i];
        // split each fixed-variable equality dual across its two bound rows
        int m_in = static_cast<int>(p.b_in.size());
        std::vector<int> up_row(n, -1), lo_row(n, -1);
        {
            int r = m_in;
            for (int j = 0; j < n; ++j)
                if (std::isfinite(p.up[j])) up_row[j] = r++;
            for (int j = 0; j < n; ++j)
                if (std::isfinite(p.lo[j])) lo_row[j] = r++;
        }
        for (std::size_t k = 0; k < sys.fixed_var.size(); ++k) {
            double nu = yv[sys.me + k];
            int j = sys.fixed_var[k];
            out.ineq_duals[up_row[j]] = std::max(nu, 0.0);
            out.ineq_duals[lo_row[j]] = std::max(-nu, 0.0);
        }
        return out;
    };

    if (mi == 0) {
        // equality-constrained: one KKT solve
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + me, n + me);
        K.topLeftCorner(n, n) = p.H;
        if (me > 0) {
            K.topRightCorner(n, me) = sys.A.transpose();
            K.bottomLeftCorner(me, n) = sys.A;
        }
        Eigen::VectorXd rhs(n + me);
        rhs.head(n) = -p.g;
        rhs.tail(me) = sys.b;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
        if (!lu.isInvertible()) {
            Eigen::VectorXd sol = lu.solve(rhs);
            if ((K * sol - rhs).lpNorm<Eigen::Infinity>() > tol) {
                out.status = qp_feasible(p) ? SolveStatus::unbounded : SolveStatus::infeasible;
                return out;
            }
            return finish_optimal(sol.head(n), sol.tail(me), lam, 1);
        }
        Eigen::VectorXd sol = lu.solve(rhs);
        return finish_optimal(sol.head(n), sol.tail(me), lam, 1);
    }

    // Mehrotra predictor-corrector
    for (int iter = 1; iter <= cfg.qp_max_iter; ++iter) {
        Eigen::VectorXd r_d = p.H * x + p.g + sys.G.transpose() * lam;
        if (me > 0) r_d += sys.A.transpose() * y;
        Eigen::VectorXd r_p = me > 0 ? Eigen::VectorXd(sys.A * x - sys.b) : Eigen::VectorXd(0);
        Eigen::VectorXd r_g = sys.G * x + s - sys.h;
        double mu = s.dot(lam) / mi;
        double comp = (s.array() * lam.array()).abs().maxCoeff();

        bool dual_ok = r_d.lpNorm<Eigen::Infinity>() <= tol;
        bool prim_ok = (me == 0 || r_p.lpNorm<Eigen::Infinity>() <= tol) &&
                       r_g.lpNorm<Eigen::Infinity>() <= tol;
        if (dual_ok && prim_ok && comp <= tol) return finish_optimal(x, y, lam, iter);

        Eigen::VectorXd d = lam.cwiseQuotient(s);  // S^-1 Lambda diagonal
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + me, n + me);
        K.topLeftCorner(n, n) = p.H + sys.G.transpose() * d.asDiagonal() * sys.G;
        if (me > 0) {
            K.topRightCorner(n, me) = sys.A.transpose();
            K.bottomLeftCorner(me, n) = sys.A;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);

        auto solve_dir = [&](const Eigen::VectorXd& rc) {
            // S dlam = -rc - Lambda ds,  ds = -r_g - G dx
            Eigen::VectorXd tmp = (-rc.array() + lam.array() * r_g.array()) / s.array();
            Eigen::VectorXd rhs(n + me);
            rhs.head(n) = -r_d - sys.G.transpose() * tmp;
            if (me > 0) rhs.tail(me) = -r_p;
            Eigen::VectorXd sol = lu.solve(rhs);
            Eigen::VectorXd dx = sol.head(n);
            Eigen::VectorXd dy = sol.tail(me);
            Eigen::VectorXd ds = -r_g - sys.G * dx;
            Eigen::VectorXd dlam = (-rc.array() - lam.array() * ds.array()) / s.array();
            return std::make_tuple(dx, dy, ds, dlam);
        };

        // affine direction
        Eigen::VectorXd rc_aff = (s.array() * lam.array()).matrix();
        auto [dx_a, dy_a, ds_a, dlam_a] = solve_dir(rc_aff);
        auto step_to_boundary = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
            double a = 1.0;
            for (int i = 0; i < v.size(); ++i)
                if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
            return a;
        };
        double ap_aff = step_to_boundary(s, ds_a);
        double ad_aff = step_to_boundary(lam, dlam_a);
        double mu_aff = (s + ap_aff * ds_a).dot(lam + ad_aff * dlam_a) / mi;
        double sigma = std::pow(mu_aff / mu, 3);
        sigma = std::min(std::max(sigma, 1e-8), 0.999);

        // corrector
        Eigen::VectorXd rc =
            (s.array() * lam.array() + ds_a.array() * dlam_a.array() - sigma * mu).matrix();
        auto [dx, dy, ds, dlam] = solve_dir(rc);
        double ap = std::min(1.0, 0.995 * step_to_boundary(s, ds));
        double ad = std::min(1.0, 0.995 * step_to_boundary(lam, dlam));

        x += ap * dx;
        s += ap * ds;
        if (me > 0) y += ad * dy;
        lam += ad * dlam;

        if (!x.allFinite() || !s.allFinite() || !lam.allFinite()) break;
    }

    out.status = qp_feasible(p) ? SolveStatus::iteration_limit : SolveStatus::infeasible;
    out.iterations = cfg.qp_max_iter;
    return out;
}

}  // namespace dadmm

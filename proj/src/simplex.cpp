#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dadmm/milp.hpp"

namespace dadmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarStatus { at_lower, at_upper, basic, free_nb };

struct ColEntry {
    int row;
    double coef;
};

// Bounded-variable revised simplex over [A | -I] z = 0 with z = (x, s).
// Phase 1 minimizes the total bound violation of the basic variables
// (composite objective), phase 2 the true cost. Dantzig pricing with a
// Bland's-rule fallback after a stall.
class Simplex {
public:
    Simplex(const MilpProblem& p, const SolverConfig& cfg) : p_(p), cfg_(cfg) {
        m_ = static_cast<int>(p.rows.size());
        n_ = p.num_vars();
        total_ = n_ + m_;
        build_columns();
        lo_.resize(total_);
        up_.resize(total_);
        for (int j = 0; j < n_; ++j) {
            lo_[j] = p.lo[j];
            up_[j] = p.up[j];
        }
        for (int i = 0; i < m_; ++i) {
            lo_[n_ + i] = p.rows[i].lo;
            up_[n_ + i] = p.rows[i].up;
        }
    }

    SolveOutcome solve() {
        init_basis();
        SolveOutcome out;
        if (!run_phase(true)) {
            out.status = SolveStatus::iteration_limit;
            out.iterations = iters_;
            return out;
        }
        if (total_violation() > feas_tol_) {
            out.status = SolveStatus::infeasible;
            out.iterations = iters_;
            return out;
        }
        if (!run_phase(false)) {
            out.status = unbounded_ ? SolveStatus::unbounded : SolveStatus::iteration_limit;
            out.iterations = iters_;
            return out;
        }
        refactorize();
        recompute_values();
        out.status = SolveStatus::optimal;
        out.x.resize(n_);
        for (int j = 0; j < n_; ++j) out.x[j] = value_[j];
        out.objective = p_.obj_offset;
        for (int j = 0; j < n_; ++j) out.objective += p_.obj[j] * value_[j];
        out.eq_duals = dual_vector(false);
        out.iterations = iters_;
        return out;
    }

private:
    const MilpProblem& p_;
    const SolverConfig& cfg_;
    int m_ = 0, n_ = 0, total_ = 0;
    std::vector<std::vector<ColEntry>> cols_;  // CSC of [A | -I]
    std::vector<double> lo_, up_;
    std::vector<int> basis_;
    std::vector<VarStatus> status_;
    std::vector<double> value_;
    Eigen::MatrixXd binv_;
    int pivots_since_factor_ = 0;
    int iters_ = 0;
    int stall_ = 0;
    bool bland_ = false;
    bool unbounded_ = false;
    const double feas_tol_ = 1e-7;

    void build_columns() {
        cols_.assign(total_, {});
        for (int i = 0; i < m_; ++i) {
            for (const auto& e : p_.rows[i].entries) cols_[e.col].push_back({i, e.coef});
            cols_[n_ + i].push_back({i, -1.0});
        }
    }

    void init_basis() {
        basis_.resize(m_);
        status_.assign(total_, VarStatus::at_lower);
        value_.assign(total_, 0.0);
        for (int j = 0; j < total_; ++j) {
            if (std::isfinite(lo_[j])) {
                status_[j] = VarStatus::at_lower;
                value_[j] = lo_[j];
            } else if (std::isfinite(up_[j])) {
                status_[j] = VarStatus::at_upper;
                value_[j] = up_[j];
            } else {
                status_[j] = VarStatus::free_nb;
                value_[j] = 0.0;
            }
        }
        for (int i = 0; i < m_; ++i) {
            basis_[i] = n_ + i;
            status_[n_ + i] = VarStatus::basic;
        }
        refactorize();
        recompute_values();
        bland_ = false;
        stall_ = 0;
        unbounded_ = false;
    }

    void refactorize() {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
        for (int i = 0; i < m_; ++i)
            for (const auto& e : cols_[basis_[i]]) B(e.row, i) = e.coef;
        binv_ = B.partialPivLu().inverse();
        pivots_since_factor_ = 0;
    }

    void recompute_values() {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
        for (int j = 0; j < total_; ++j) {
            if (status_[j] == VarStatus::basic) continue;
            double v = value_[j];
            if (v != 0.0)
                for (const auto& e : cols_[j]) rhs[e.row] -= e.coef * v;
        }
        Eigen::VectorXd xb = binv_ * rhs;
        for (int i = 0; i < m_; ++i) value_[basis_[i]] = xb[i];
    }

    double violation(int j) const {
        double v = value_[j];
        if (v < lo_[j]) return lo_[j] - v;
        if (v > up_[j]) return v - up_[j];
        return 0.0;
    }

    double total_violation() const {
        double t = 0.0;
        for (int i = 0; i < m_; ++i) t += violation(basis_[i]);
        return t;
    }

    // phase-1 cost: +1 above the upper bound, -1 below the lower bound
    double phase_cost(int j, bool phase1) const {
        if (!phase1) return j < n_ ? p_.obj[j] : 0.0;
        double v = value_[j];
        if (v > up_[j] + feas_tol_) return 1.0;
        if (v < lo_[j] - feas_tol_) return -1.0;
        return 0.0;
    }

    Eigen::VectorXd dual_vector(bool phase1) const {
        Eigen::VectorXd cb(m_);
        for (int i = 0; i < m_; ++i) cb[i] = phase_cost(basis_[i], phase1);
        return binv_.transpose() * cb;
    }

    double reduced_cost(int j, const Eigen::VectorXd& y, bool phase1) const {
        double d = phase_cost(j, phase1);
        for (const auto& e : cols_[j]) d -= y[e.row] * e.coef;
        return d;
    }

    bool run_phase(bool phase1) {
        const double opt_tol = 1e-9;
        const long max_iters = 20000 + 50L * total_;
        double last_metric = kInf;
        for (; iters_ < max_iters; ++iters_) {
            if (phase1 && total_violation() <= feas_tol_) return true;
            Eigen::VectorXd y = dual_vector(phase1);
            int enter = -1;
            int dir = +1;
            double best = opt_tol;
            for (int j = 0; j < total_; ++j) {
                if (status_[j] == VarStatus::basic) continue;
                double d = reduced_cost(j, y, phase1);
                bool can_up = status_[j] == VarStatus::at_lower || status_[j] == VarStatus::free_nb;
                bool can_dn = status_[j] == VarStatus::at_upper || status_[j] == VarStatus::free_nb;
                double score = 0.0;
                int jdir = 0;
                if (can_up && d < -opt_tol) {
                    score = -d;
                    jdir = +1;
                }
                if (can_dn && d > opt_tol && d > score) {
                    score = d;
                    jdir = -1;
                }
                if (jdir == 0) continue;
                if (bland_) {
                    enter = j;
                    dir = jdir;
                    break;
                }
                if (score > best) {
                    best = score;
                    enter = j;
                    dir = jdir;
                }
            }
            if (enter < 0) return true;  // phase optimum reached

            Eigen::VectorXd col = Eigen::VectorXd::Zero(m_);
            for (const auto& e : cols_[enter]) col[e.row] = e.coef;
            Eigen::VectorXd w = binv_ * col;

            // x_B(t) = x_B - t*dir*w as the entering variable moves by t*dir
            double t_best = kInf;
            int leave_row = -1;
            double leave_to = 0.0;
            if (std::isfinite(up_[enter]) && std::isfinite(lo_[enter]))
                t_best = up_[enter] - lo_[enter];
            for (int i = 0; i < m_; ++i) {
                double delta = -dir * w[i];
                if (std::abs(delta) < cfg_.lp_pivot_tol) continue;
                int bj = basis_[i];
                double v = value_[bj];
                double cand = kInf, target = 0.0;
                if (v > up_[bj] + feas_tol_) {
                    if (delta < 0) {  // violated above, improving: stop at up
                        cand = (up_[bj] - v) / delta;
                        target = up_[bj];
                    }
                } else if (v < lo_[bj] - feas_tol_) {
                    if (delta > 0) {
                        cand = (lo_[bj] - v) / delta;
                        target = lo_[bj];
                    }
                } else if (delta > 0 && std::isfinite(up_[bj])) {
                    cand = (up_[bj] - v) / delta;
                    target = up_[bj];
                } else if (delta < 0 && std::isfinite(lo_[bj])) {
                    cand = (lo_[bj] - v) / delta;
                    target = lo_[bj];
                }
                if (cand == kInf) continue;
                if (cand < 0) cand = 0.0;
                bool better = cand < t_best - 1e-12;
                bool tie = !better && cand < t_best + 1e-12 &&
                           (leave_row < 0 || bj < basis_[leave_row]);
                if (better || tie) {
                    t_best = cand;
                    leave_row = i;
                    leave_to = target;
                }
            }
            if (!std::isfinite(t_best)) {
                if (phase1) {
                    // cannot happen: the composite objective is bounded below
                    throw std::logic_error("simplex: unbounded phase-1 ray");
                }
                unbounded_ = true;
                return false;
            }

            if (leave_row < 0) {
                // bound flip
                for (int i = 0; i < m_; ++i) value_[basis_[i]] -= t_best * dir * w[i];
                value_[enter] += dir * t_best;
                status_[enter] = dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
            } else {
                int leave = basis_[leave_row];
                for (int i = 0; i < m_; ++i) value_[basis_[i]] -= t_best * dir * w[i];
                value_[enter] += dir * t_best;
                value_[leave] = leave_to;
                status_[leave] = (leave_to == lo_[leave]) ? VarStatus::at_lower : VarStatus::at_upper;
                status_[enter] = VarStatus::basic;
                basis_[leave_row] = enter;
                update_binv(w, leave_row);
                if (++pivots_since_factor_ >= cfg_.lp_refactor_every) {
                    refactorize();
                    recompute_values();
                }
            }

            double metric = phase1 ? total_violation() : current_objective();
            if (metric > last_metric - 1e-12) {
                if (++stall_ > 2 * (m_ + 16)) bland_ = true;
            } else {
                stall_ = 0;
                bland_ = false;
            }
            last_metric = metric;
        }
        return false;
    }

    double current_objective() const {
        double o = 0.0;
        for (int j = 0; j < n_; ++j) o += p_.obj[j] * value_[j];
        return o;
    }

    // product-form update after basis column r is replaced; w = B^-1 a_enter
    void update_binv(const Eigen::VectorXd& w, int r) {
        double piv = w[r];
        if (std::abs(piv) < 1e-11) {
            refactorize();
            recompute_values();
            return;
        }
        binv_.row(r) /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            double f = w[i];
            if (f != 0.0) binv_.row(i) -= f * binv_.row(r);
        }
    }
};

}  // namespace

SolveOutcome solve_lp(const MilpProblem& p, const SolverConfig& cfg) {
    if (!p.binaries.empty() || !p.bilinear.empty())
        throw std::invalid_argument("solve_lp: problem has integer or bilinear structure");
    p.check();
    Simplex s(p, cfg);
    return s.solve();
}

}  // namespace dadmm

#include "dadmm/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace dadmm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::iteration_limit: return "iteration_limit";
        case SolveStatus::time_limit: return "time_limit";
    }
    return "unknown";
}

int MilpProblem::add_var(double lo_v, double up_v, double obj_c) {
    obj.push_back(obj_c);
    lo.push_back(lo_v);
    up.push_back(up_v);
    return static_cast<int>(obj.size()) - 1;
}

int MilpProblem::add_binary(double obj_c) {
    int j = add_var(0.0, 1.0, obj_c);
    binaries.push_back(j);
    return j;
}

int MilpProblem::add_row(std::vector<RowEntry> entries, double lo_r, double up_r) {
    rows.push_back({std::move(entries), lo_r, up_r});
    return static_cast<int>(rows.size()) - 1;
}

int MilpProblem::add_eq_row(std::vector<RowEntry> entries, double rhs) {
    return add_row(std::move(entries), rhs, rhs);
}

int MilpProblem::add_le_row(std::vector<RowEntry> entries, double rhs) {
    return add_row(std::move(entries), -kInf, rhs);
}

void MilpProblem::add_coeff(int row, int col, double coef) {
    for (auto& e : rows.at(row).entries) {
        if (e.col == col) {
            e.coef += coef;
            return;
        }
    }
    rows[row].entries.push_back({col, coef});
}

void MilpProblem::add_bilinear(int x, int y, int w) {
    if (!std::isfinite(lo[x]) || !std::isfinite(up[x]) || !std::isfinite(lo[y]) ||
        !std::isfinite(up[y]))
        throw std::invalid_argument("bilinear factors must have finite bounds");
    bilinear.push_back({x, y, w});
}

void MilpProblem::check() const {
    int n = num_vars();
    if (static_cast<int>(lo.size()) != n || static_cast<int>(up.size()) != n)
        throw std::invalid_argument("milp: bound arrays out of sync");
    for (int j = 0; j < n; ++j)
        if (lo[j] > up[j] + 1e-12) throw std::invalid_argument("milp: lo > up");
    for (int b : binaries)
        if (b < 0 || b >= n) throw std::invalid_argument("milp: binary index out of range");
    for (const auto& t : bilinear) {
        if (t.x < 0 || t.x >= n || t.y < 0 || t.y >= n || t.w < 0 || t.w >= n)
            throw std::invalid_argument("milp: bilinear index out of range");
        if (!std::isfinite(lo[t.x]) || !std::isfinite(up[t.x]) || !std::isfinite(lo[t.y]) ||
            !std::isfinite(up[t.y]))
            throw std::invalid_argument("milp: bilinear factor unbounded");
    }
    for (const auto& r : rows)
        for (const auto& e : r.entries)
            if (e.col < 0 || e.col >= n) throw std::invalid_argument("milp: row column out of range");
}

std::pair<double, double> MilpProblem::row_activity_bounds(const LinearRow& row) const {
    double mn = 0.0, mx = 0.0;
    for (const auto& e : row.entries) {
        double a = e.coef * lo[e.col], b = e.coef * up[e.col];
        mn += std::min(a, b);
        mx += std::max(a, b);
    }
    return {mn, mx};
}

double MilpProblem::eval_row(const LinearRow& row, const std::vector<double>& x) const {
    double v = 0.0;
    for (const auto& e : row.entries) v += e.coef * x[e.col];
    return v;
}

void MilpProblem::write_lp(std::ostream& os, const std::string& name) const {
    os << "\\ " << name << "\nMinimize\n obj:";
    for (int j = 0; j < num_vars(); ++j)
        if (obj[j] != 0.0) os << (obj[j] >= 0 ? " + " : " - ") << std::abs(obj[j]) << " x" << j;
    os << "\nSubject To\n";
    auto write_expr = [&](const LinearRow& r) {
        for (const auto& e : r.entries)
            os << (e.coef >= 0 ? " + " : " - ") << std::abs(e.coef) << " x" << e.col;
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.lo == r.up) {
            os << " c" << i << ":";
            write_expr(r);
            os << " = " << r.lo << "\n";
        } else {
            if (std::isfinite(r.up)) {
                os << " c" << i << "u:";
                write_expr(r);
                os << " <= " << r.up << "\n";
            }
            if (std::isfinite(r.lo)) {
                os << " c" << i << "l:";
                write_expr(r);
                os << " >= " << r.lo << "\n";
            }
        }
    }
    os << "Bounds\n";
    for (int j = 0; j < num_vars(); ++j) {
        os << " ";
        if (std::isfinite(lo[j])) os << lo[j] << " <= ";
        else os << "-inf <= ";
        os << "x" << j;
        if (std::isfinite(up[j])) os << " <= " << up[j];
        os << "\n";
    }
    if (!binaries.empty()) {
        os << "Binary\n";
        for (int b : binaries) os << " x" << b;
        os << "\n";
    }
    os << "End\n";
}

namespace {

struct Node {
    std::vector<double> lo, up;
    double bound;
    long id;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // best bound first
        return a.id > b.id;
    }
};

// node LP: original rows + McCormick envelopes under the node's box
MilpProblem node_relaxation(const MilpProblem& p, const Node& nd) {
    MilpProblem r;
    r.obj = p.obj;
    r.obj_offset = p.obj_offset;
    r.lo = nd.lo;
    r.up = nd.up;
    r.rows = p.rows;
    for (const auto& t : p.bilinear) {
        double xl = nd.lo[t.x], xu = nd.up[t.x], yl = nd.lo[t.y], yu = nd.up[t.y];
        // w >= xl*y + yl*x - xl*yl ; w >= xu*y + yu*x - xu*yu
        r.add_row({{t.w, 1.0}, {t.y, -xl}, {t.x, -yl}}, -xl * yl, kInf);
        r.add_row({{t.w, 1.0}, {t.y, -xu}, {t.x, -yu}}, -xu * yu, kInf);
        // w <= xu*y + yl*x - xu*yl ; w <= xl*y + yu*x - xl*yu
        r.add_row({{t.w, 1.0}, {t.y, -xu}, {t.x, -yl}}, -kInf, -xu * yl);
        r.add_row({{t.w, 1.0}, {t.y, -xl}, {t.x, -yu}}, -kInf, -xl * yu);
        // implied box for w
        double c1 = xl * yl, c2 = xl * yu, c3 = xu * yl, c4 = xu * yu;
        double wl = std::min(std::min(c1, c2), std::min(c3, c4));
        double wu = std::max(std::max(c1, c2), std::max(c3, c4));
        r.lo[t.w] = std::max(r.lo[t.w], wl);
        r.up[t.w] = std::min(r.up[t.w], wu);
        if (r.lo[t.w] > r.up[t.w]) r.lo[t.w] = r.up[t.w];  // caught as infeasible by the LP
    }
    return r;
}

bool incumbent_feasible(const MilpProblem& p, const std::vector<double>& x, const SolverConfig& cfg) {
    for (int j = 0; j < p.num_vars(); ++j)
        if (x[j] < p.lo[j] - 1e-7 || x[j] > p.up[j] + 1e-7) return false;
    for (const auto& r : p.rows) {
        double v = p.eval_row(r, x);
        double scale = 1.0 + std::abs(v);
        if (v < r.lo - 1e-6 * scale || v > r.up + 1e-6 * scale) return false;
    }
    for (int b : p.binaries)
        if (std::abs(x[b] - std::round(x[b])) > cfg.milp_int_tol) return false;
    for (const auto& t : p.bilinear) {
        double scale = 1.0 + std::abs(x[t.x] * x[t.y]);
        if (std::abs(x[t.w] - x[t.x] * x[t.y]) > cfg.bilinear_tol * scale * 10) return false;
    }
    return true;
}

}  // namespace

SolveOutcome solve_milp(const MilpProblem& p, const SolverConfig& cfg) {
    p.check();
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    SolveOutcome best;
    best.status = SolveStatus::infeasible;
    double incumbent = kInf;
    std::vector<double> inc_x;

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push({p.lo, p.up, -kInf, next_id++});
    long nodes = 0;
    bool budget_hit = false;
    double best_open_bound = -kInf;

    SolverConfig lp_cfg = cfg;
    while (!open.empty()) {
        if (nodes >= cfg.node_limit || elapsed() > cfg.time_limit_s) {
            budget_hit = true;
            best_open_bound = open.top().bound;
            break;
        }
        Node nd = open.top();
        open.pop();
        if (nd.bound >= incumbent - cfg.milp_gap_tol * (1.0 + std::abs(incumbent))) {
            best_open_bound = nd.bound;
            // best-bound order: everything left is at least as bad
            break;
        }
        ++nodes;

        MilpProblem relax = node_relaxation(p, nd);
        bool box_ok = true;
        for (int j = 0; j < relax.num_vars() && box_ok; ++j)
            if (relax.lo[j] > relax.up[j] + 1e-12) box_ok = false;
        if (!box_ok) continue;
        SolveOutcome lp = solve_lp(relax, lp_cfg);
        if (lp.status == SolveStatus::infeasible) continue;
        if (lp.status == SolveStatus::unbounded) {
            if (!std::isfinite(incumbent)) {
                best.status = SolveStatus::unbounded;
                return best;
            }
            continue;
        }
        if (lp.status != SolveStatus::optimal) continue;
        if (lp.objective >= incumbent - cfg.milp_gap_tol * (1.0 + std::abs(incumbent))) continue;

        std::vector<double> x(lp.x.data(), lp.x.data() + lp.x.size());

        // most-fractional binary
        int frac_var = -1;
        double frac_score = cfg.milp_int_tol;
        for (int b : p.binaries) {
            double f = std::abs(x[b] - std::round(x[b]));
            if (f > frac_score) {
                frac_score = f;
                frac_var = b;
            }
        }
        if (frac_var >= 0) {
            Node down = nd, upn = nd;
            down.up[frac_var] = 0.0;
            down.lo[frac_var] = 0.0;
            upn.lo[frac_var] = 1.0;
            upn.up[frac_var] = 1.0;
            down.bound = upn.bound = lp.objective;
            down.id = next_id++;
            upn.id = next_id++;
            open.push(down);
            open.push(upn);
            continue;
        }

        // largest McCormick violation
        int viol_term = -1;
        double viol = cfg.bilinear_tol;
        for (std::size_t t = 0; t < p.bilinear.size(); ++t) {
            const auto& bt = p.bilinear[t];
            double v = std::abs(x[bt.w] - x[bt.x] * x[bt.y]);
            if (v > viol) {
                viol = v;
                viol_term = static_cast<int>(t);
            }
        }
        if (viol_term >= 0) {
            const auto& bt = p.bilinear[viol_term];
            // bisect the factor with the wider node range
            int v = (nd.up[bt.x] - nd.lo[bt.x] >= nd.up[bt.y] - nd.lo[bt.y]) ? bt.x : bt.y;
            double mid = 0.5 * (nd.lo[v] + nd.up[v]);
            if (nd.up[v] - nd.lo[v] < 1e-9) continue;  // box exhausted, numerical noise
            Node left = nd, right = nd;
            left.up[v] = mid;
            right.lo[v] = mid;
            left.bound = right.bound = lp.objective;
            left.id = next_id++;
            right.id = next_id++;
            open.push(left);
            open.push(right);
            continue;
        }

        // integral and McCormick-tight: candidate incumbent
        for (int b : p.binaries) x[b] = std::round(x[b]);
        if (!incumbent_feasible(p, x, cfg)) continue;
        double obj = p.obj_offset;
        for (int j = 0; j < p.num_vars(); ++j) obj += p.obj[j] * x[j];
        if (obj < incumbent) {
            incumbent = obj;
            inc_x = x;
        }
    }

    if (!open.empty() && !budget_hit) best_open_bound = std::max(best_open_bound, open.top().bound);
    if (open.empty()) best_open_bound = incumbent;

    best.nodes = nodes;
    if (std::isfinite(incumbent)) {
        best.x = Eigen::Map<const Eigen::VectorXd>(inc_x.data(), inc_x.size());
        best.objective = incumbent;
        double denom = std::max(1.0, std::abs(incumbent));
        best.gap = std::max(0.0, (incumbent - best_open_bound) / denom);
        best.status = budget_hit && best.gap > cfg.milp_gap_tol ? SolveStatus::time_limit
                                                                : SolveStatus::optimal;
    } else {
        best.status = budget_hit ? SolveStatus::time_limit : SolveStatus::infeasible;
        best.gap = kInf;
    }
    return best;
}

void canonical_inequalities(const QpProblem& p, Eigen::MatrixXd& G, Eigen::VectorXd& h) {
    int n = p.num_vars();
    int m_in = static_cast<int>(p.b_in.size());
    std::vector<int> ubs, lbs;
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(p.up[j])) ubs.push_back(j);
        if (std::isfinite(p.lo[j])) lbs.push_back(j);
    }
    int rows = m_in + static_cast<int>(ubs.size() + lbs.size());
    G = Eigen::MatrixXd::Zero(rows, n);
    h.resize(rows);
    if (m_in > 0) {
        G.topRows(m_in) = p.a_in;
        h.head(m_in) = p.b_in;
    }
    int r = m_in;
    for (int j : ubs) {
        G(r, j) = 1.0;
        h[r] = p.up[j];
        ++r;
    }
    for (int j : lbs) {
        G(r, j) = -1.0;
        h[r] = -p.lo[j];
        ++r;
    }
}

Eigen::VectorXd propagate_big_m(const QpProblem& p, const SolverConfig& cfg) {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    canonical_inequalities(p, G, h);
    int n = p.num_vars();
    Eigen::VectorXd M(G.rows());
    for (int i = 0; i < G.rows(); ++i) {
        // max of h_i - G_i x over the box = slack upper bound
        double s = h[i];
        bool finite = true;
        for (int j = 0; j < n && finite; ++j) {
            double c = G(i, j);
            if (c == 0.0) continue;
            double lo = p.lo[j], up = p.up[j];
            double contrib = c > 0 ? -c * lo : -c * up;  // maximize -c*x
            if (!std::isfinite(contrib)) finite = false;
            s += contrib;
        }
        double m = finite ? s : cfg.bigm_cap;
        M[i] = std::min(cfg.bigm_cap, std::max(cfg.bigm_floor, m));
    }
    return M;
}

KktBlock add_kkt_block(MilpProblem& m, const QpProblem& p, const Eigen::VectorXd& bigM,
                       const SolverConfig& cfg) {
    p.check();
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    canonical_inequalities(p, G, h);
    int n = p.num_vars();
    int me = static_cast<int>(p.b_eq.size());
    int mi = static_cast<int>(h.size());
    if (bigM.size() != mi)
        throw std::invalid_argument("kkt block: bigM has " + std::to_string(bigM.size()) +
                                    " entries, expected " + std::to_string(mi));
    for (int i = 0; i < mi; ++i)
        if (!(bigM[i] > 0)) throw std::invalid_argument("kkt block: bigM entries must be positive");

    KktBlock blk;
    blk.num_ineq = mi;
    blk.x0 = m.num_vars();
    for (int j = 0; j < n; ++j) m.add_var(p.lo[j], p.up[j]);
    blk.nu0 = m.num_vars();
    for (int e = 0; e < me; ++e) m.add_var(-cfg.dual_bound, cfg.dual_bound);
    blk.lam0 = m.num_vars();
    for (int i = 0; i < mi; ++i) m.add_var(0.0, bigM[i]);
    blk.phi0 = m.num_vars();
    for (int i = 0; i < mi; ++i) m.add_binary();

    // stationarity: H x + A_eq' nu + G' lam = -g
    blk.stat_row0 = static_cast<int>(m.rows.size());
    for (int k = 0; k < n; ++k) {
        std::vector<RowEntry> row;
        for (int j = 0; j < n; ++j)
            if (p.H(k, j) != 0.0) row.push_back({blk.x0 + j, p.H(k, j)});
        for (int e = 0; e < me; ++e)
            if (p.a_eq(e, k) != 0.0) row.push_back({blk.nu0 + e, p.a_eq(e, k)});
        for (int i = 0; i < mi; ++i)
            if (G(i, k) != 0.0) row.push_back({blk.lam0 + i, G(i, k)});
        m.add_eq_row(std::move(row), -p.g[k]);
    }
    // primal feasibility
    for (int e = 0; e < me; ++e) {
        std::vector<RowEntry> row;
        for (int j = 0; j < n; ++j)
            if (p.a_eq(e, j) != 0.0) row.push_back({blk.x0 + j, p.a_eq(e, j)});
        m.add_eq_row(std::move(row), p.b_eq[e]);
    }
    for (int i = 0; i < mi; ++i) {
        std::vector<RowEntry> row;
        for (int j = 0; j < n; ++j)
            if (G(i, j) != 0.0) row.push_back({blk.x0 + j, G(i, j)});
        m.add_le_row(std::move(row), h[i]);
    }
    // big-M complementarity: lam_i <= M phi_i ; h_i - G_i x <= M (1 - phi_i)
    for (int i = 0; i < mi; ++i) {
        m.add_le_row({{blk.lam0 + i, 1.0}, {blk.phi0 + i, -bigM[i]}}, 0.0);
        std::vector<RowEntry> row{{blk.phi0 + i, bigM[i]}};
        for (int j = 0; j < n; ++j)
            if (G(i, j) != 0.0) row.push_back({blk.x0 + j, -G(i, j)});
        m.add_le_row(std::move(row), bigM[i] - h[i]);
    }
    blk.num_vars = n;
    return blk;
}

}  // namespace dadmm

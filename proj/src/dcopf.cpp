#include "dadmm/dcopf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace dadmm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int DcLayout::theta_col(int bus_id) const {
    for (std::size_t i = 0; i < theta_bus.size(); ++i)
        if (theta_bus[i] == bus_id) return theta0 + static_cast<int>(i);
    throw std::invalid_argument("layout: no angle column for bus " + std::to_string(bus_id));
}

int DcLayout::flow_col(int branch_index) const {
    for (std::size_t i = 0; i < flow_branch.size(); ++i)
        if (flow_branch[i] == branch_index) return flow0 + static_cast<int>(i);
    throw std::invalid_argument("layout: no flow column for branch " + std::to_string(branch_index));
}

int DcLayout::gen_col(int gen_index_in_case) const {
    for (std::size_t i = 0; i < gen_index.size(); ++i)
        if (gen_index[i] == gen_index_in_case) return gen0 + static_cast<int>(i);
    throw std::invalid_argument("layout: no generator column " + std::to_string(gen_index_in_case));
}

namespace {

// Assemble a DC QP over the given buses. Branch set splits into `owned`
// (balance rows see them, flow-definition rows added) and nothing else; every
// bus in `balance_buses` gets a nodal balance row. Foreign angle columns come
// from tie endpoints outside the bus set.
struct DcAssembler {
    const NetworkCase& c;
    DcLayout layout;
    std::vector<int> branch_list;      // owned + duplicated branches, in order
    std::vector<int> balance_buses;    // bus ids with balance rows
    bool fix_reference = false;

    QpProblem build() {
        const double base = c.base_mva;
        int nt = static_cast<int>(layout.theta_bus.size());
        int ng = static_cast<int>(layout.gen_index.size());
        int nf = static_cast<int>(branch_list.size());
        layout.theta0 = 0;
        layout.gen0 = nt;
        layout.flow0 = nt + ng;
        layout.n = nt + ng + nf;
        layout.flow_branch = branch_list;

        QpProblem p;
        int n = layout.n;
        p.H = Eigen::MatrixXd::Zero(n, n);
        p.g = Eigen::VectorXd::Zero(n);
        p.lo = Eigen::VectorXd::Constant(n, -kInf);
        p.up = Eigen::VectorXd::Constant(n, kInf);

        for (int t = 0; t < nt; ++t) {
            p.lo[layout.theta0 + t] = -kAngleBound;
            p.up[layout.theta0 + t] = kAngleBound;
        }
        for (int gi = 0; gi < ng; ++gi) {
            const auto& g = c.generators[layout.gen_index[gi]];
            int col = layout.gen0 + gi;
            p.lo[col] = g.p_min_mw / base;
            p.up[col] = g.p_max_mw / base;
            p.H(col, col) = 2.0 * g.c2 * base * base;
            p.g[col] = g.c1 * base;
            p.obj_offset += g.c0;
        }
        for (int fi = 0; fi < nf; ++fi) {
            const auto& br = c.branches[branch_list[fi]];
            int col = layout.flow0 + fi;
            if (std::isfinite(br.limit_mw)) {
                p.lo[col] = -br.limit_mw / base;
                p.up[col] = br.limit_mw / base;
            }
        }

        int me = nf + static_cast<int>(balance_buses.size()) + (fix_reference ? 1 : 0);
        p.a_eq = Eigen::MatrixXd::Zero(me, n);
        p.b_eq = Eigen::VectorXd::Zero(me);
        int row = 0;
        // flow definition: f - (theta_u - theta_v)/x = 0
        for (int fi = 0; fi < nf; ++fi) {
            const auto& br = c.branches[branch_list[fi]];
            double b = 1.0 / br.reactance;
            p.a_eq(row, layout.flow0 + fi) = 1.0;
            p.a_eq(row, layout.theta_col(br.from_bus)) = -b;
            p.a_eq(row, layout.theta_col(br.to_bus)) = b;
            ++row;
        }
        // nodal balance: sum(gen) - load = sum(outgoing flows)
        for (int bus : balance_buses) {
            for (int fi = 0; fi < nf; ++fi) {
                const auto& br = c.branches[branch_list[fi]];
                if (br.from_bus == bus) p.a_eq(row, layout.flow0 + fi) = 1.0;
                else if (br.to_bus == bus) p.a_eq(row, layout.flow0 + fi) = -1.0;
            }
            for (int gi = 0; gi < ng; ++gi)
                if (c.generators[layout.gen_index[gi]].bus == bus)
                    p.a_eq(row, layout.gen0 + gi) = -1.0;
            for (const auto& b : c.buses)
                if (b.id == bus) p.b_eq[row] = -b.load_mw / base;
            ++row;
        }
        if (fix_reference) {
            p.a_eq(row, layout.theta_col(c.reference_bus)) = 1.0;
            p.b_eq[row] = 0.0;
        }
        return p;
    }
};

}  // namespace

QpProblem build_central_dcopf(const NetworkCase& c, DcLayout* layout_out) {
    c.validate();
    DcAssembler a{c, {}, {}, {}, true};
    for (const auto& b : c.buses) a.layout.theta_bus.push_back(b.id);
    for (std::size_t g = 0; g < c.generators.size(); ++g)
        a.layout.gen_index.push_back(static_cast<int>(g));
    for (std::size_t br = 0; br < c.branches.size(); ++br)
        a.branch_list.push_back(static_cast<int>(br));
    for (const auto& b : c.buses) a.balance_buses.push_back(b.id);
    QpProblem p = a.build();
    if (layout_out) *layout_out = a.layout;
    return p;
}

double AgentModel::gen_cost(const Eigen::VectorXd& x_local, double /*base_mva*/) const {
    // cost coefficients live in base.H/base.g, so evaluating the base
    // objective gives the agent's generation cost in $/h
    return 0.5 * x_local.dot(base.H * x_local) + base.g.dot(x_local) + base.obj_offset;
}

int ConsensusModel::agent_of_area(int area) const {
    for (std::size_t i = 0; i < agents.size(); ++i)
        if (agents[i].area == area) return static_cast<int>(i);
    throw std::invalid_argument("no agent for area " + std::to_string(area));
}

ConsensusModel build_consensus(const NetworkCase& c, const Partition& part, double rho) {
    if (!(rho > 0)) throw ValidationError("rho must be positive");
    c.validate();
    if (part.num_areas() > 1 && part.tie_lines.empty())
        throw ValidationError("degenerate decomposition: multiple areas but no tie lines");

    ConsensusModel m;
    m.net = c;
    m.part = part;
    m.rho = rho;

    // registry: per tie line (ascending branch index): angle(from), angle(to), flow
    for (int t : part.tie_lines) {
        const auto& br = c.branches[t];
        int area_f = part.area_of_bus.at(br.from_bus);
        int area_t = part.area_of_bus.at(br.to_bus);
        m.registry.push_back({SharedKind::angle, t, br.from_bus, area_f, area_t});
        m.registry.push_back({SharedKind::angle, t, br.to_bus, area_f, area_t});
        m.registry.push_back({SharedKind::flow, t, -1, area_f, area_t});
    }

    for (int area : part.area_ids) {
        AgentModel agent;
        agent.area = area;
        for (const auto& b : c.buses)
            if (part.area_of_bus.at(b.id) == area) agent.own_buses.push_back(b.id);

        std::set<int> theta_buses(agent.own_buses.begin(), agent.own_buses.end());
        std::vector<int> foreign;
        std::vector<int> branch_list;
        for (std::size_t br = 0; br < c.branches.size(); ++br) {
            int af = part.area_of_bus.at(c.branches[br].from_bus);
            int at = part.area_of_bus.at(c.branches[br].to_bus);
            if (af == area && at == area) branch_list.push_back(static_cast<int>(br));
        }
        for (int t : part.tie_lines) {
            const auto& br = c.branches[t];
            int af = part.area_of_bus.at(br.from_bus);
            int at = part.area_of_bus.at(br.to_bus);
            if (af != area && at != area) continue;
            branch_list.push_back(t);
            int other = af == area ? br.to_bus : br.from_bus;
            if (!theta_buses.count(other)) {
                theta_buses.insert(other);
                foreign.push_back(other);
            }
        }
        std::sort(branch_list.begin(), branch_list.end());
        std::sort(foreign.begin(), foreign.end());

        DcAssembler a{c, {}, {}, {}, false};
        a.layout.theta_bus = agent.own_buses;
        for (int b : foreign) a.layout.theta_bus.push_back(b);
        for (std::size_t g = 0; g < c.generators.size(); ++g)
            if (part.area_of_bus.at(c.generators[g].bus) == area)
                a.layout.gen_index.push_back(static_cast<int>(g));
        a.branch_list = branch_list;
        a.balance_buses = agent.own_buses;
        a.fix_reference = part.area_of_bus.at(c.reference_bus) == area;
        agent.base = a.build();
        agent.layout = a.layout;

        // shared slots in ascending registry order
        for (std::size_t r = 0; r < m.registry.size(); ++r) {
            const auto& sv = m.registry[r];
            if (sv.area_a != area && sv.area_b != area) continue;
            agent.shared_reg.push_back(static_cast<int>(r));
            int col = sv.kind == SharedKind::flow ? agent.layout.flow_col(sv.tie_branch)
                                                  : agent.layout.theta_col(sv.bus);
            agent.shared_col.push_back(col);
        }
        m.agents.push_back(std::move(agent));
    }

    m.copies.assign(m.registry.size(), {});
    for (std::size_t ai = 0; ai < m.agents.size(); ++ai)
        for (std::size_t slot = 0; slot < m.agents[ai].shared_reg.size(); ++slot)
            m.copies[m.agents[ai].shared_reg[slot]].push_back(
                {static_cast<int>(ai), static_cast<int>(slot)});
    for (std::size_t r = 0; r < m.registry.size(); ++r)
        if (m.copies[r].size() < 2)
            throw ValidationError("shared variable with multiplicity < 2");
    return m;
}

QpProblem agent_subproblem(const AgentModel& agent, double rho, const Eigen::VectorXd& z_i,
                           const Eigen::VectorXd& y_i) {
    QpProblem p = agent.base;
    int slots = static_cast<int>(agent.shared_col.size());
    if (z_i.size() != slots || y_i.size() != slots)
        throw std::invalid_argument("agent_subproblem: shared vector size mismatch");
    for (int s = 0; s < slots; ++s) {
        int col = agent.shared_col[s];
        p.H(col, col) += rho;
        p.g[col] += y_i[s] - rho * z_i[s];
        p.obj_offset += 0.5 * rho * z_i[s] * z_i[s];
    }
    return p;
}

}  // namespace dadmm

#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "dadmm/caseio.hpp"
#include "dadmm/qp.hpp"

namespace dadmm {

// Column layout of a DC power flow problem over a bus set: angles, generator
// outputs, branch flows, all in per-unit.
struct DcLayout {
    std::vector<int> theta_bus;       // column -> bus id
    std::vector<int> gen_index;       // column -> index into case generators
    std::vector<int> flow_branch;     // column -> index into case branches
    int theta0 = 0;
    int gen0 = 0;
    int flow0 = 0;
    int n = 0;

    int theta_col(int bus_id) const;
    int flow_col(int branch_index) const;
    int gen_col(int gen_index_in_case) const;
};

// Bound on voltage angles; generous for DC operating ranges but keeps every
// variable box finite for the big-M and McCormick machinery.
inline constexpr double kAngleBound = 1.5707963267948966;

// Full-network DC optimal power flow: nodal balance, flow definition over
// reactances, flow and generator limits, reference angle fixed to zero.
// Objective in $/h with generation in MW (columns stay per-unit).
QpProblem build_central_dcopf(const NetworkCase& c, DcLayout* layout = nullptr);

// Consensus decomposition -------------------------------------------------

// One consensus variable. Every tie line contributes its two endpoint angles
// and its flow, each duplicated by exactly the two adjacent areas.
enum class SharedKind { angle, flow };

struct SharedVar {
    SharedKind kind;
    int tie_branch;  // index into NetworkCase::branches
    int bus;         // endpoint bus id for angles, -1 for flows
    int area_a;      // owning areas
    int area_b;
};

// One agent's subproblem template: internal DC constraints plus duplicated
// tie-line physics, with the consensus penalty applied per iteration.
struct AgentModel {
    int area = 0;
    DcLayout layout;              // theta: own buses then foreign endpoints
    std::vector<int> own_buses;
    QpProblem base;               // cost objective; no penalty terms
    std::vector<int> shared_reg;  // slot -> registry index (ascending)
    std::vector<int> shared_col;  // slot -> local column
    double gen_cost(const Eigen::VectorXd& x_local, double base_mva) const;
};

struct ConsensusModel {
    NetworkCase net;
    Partition part;
    double rho = 0.0;
    std::vector<SharedVar> registry;
    std::vector<AgentModel> agents;  // ascending area id
    // registry index -> (agent index, slot) copies
    std::vector<std::vector<std::pair<int, int>>> copies;

    int num_shared() const { return static_cast<int>(registry.size()); }
    int agent_of_area(int area) const;
    int multiplicity(int r) const { return static_cast<int>(copies[r].size()); }
};

ConsensusModel build_consensus(const NetworkCase& c, const Partition& part, double rho);

// Agent subproblem at one ADMM iteration: base objective plus
// y'(A x) + rho/2 ||A x - z||^2 on the shared coordinates.
QpProblem agent_subproblem(const AgentModel& agent, double rho, const Eigen::VectorXd& z_i,
                           const Eigen::VectorXd& y_i);

}  // namespace dadmm

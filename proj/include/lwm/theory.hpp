#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lwm::theory {

// Explicit finite MDP. T[s][a][s'] and R[s][a].
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<std::vector<std::vector<double>>> T;
    std::vector<std::vector<double>> R;
    double gamma = 0.9;

    // Throws InvalidArgument on shape errors, rows not summing to 1 within
    // 1e-12, non-finite rewards or gamma outside [0, 1).
    void validate() const;
    double min_reward() const;
    double max_reward() const;
};

// Maps each ground state to an abstract class 0..n_abstract-1.
struct Abstraction {
    std::vector<int> psi;
    int n_abstract = 0;

    void validate(int n_states) const;  // total and surjective
    std::vector<std::vector<int>> classes() const;
    static Abstraction identity(int n_states);
};

using Policy = std::vector<int>;

struct ValueFunction {
    std::vector<double> v;
    double gamma = 0.0;
    double tolerance = 0.0;
    double residual = 0.0;  // sup-norm Bellman residual at exit
    int sweeps = 0;
};

// Uniform-weight aggregation: rewards and class-lifted transitions are
// averaged over the members of each class.
TabularMdp build_abstract_mdp(const TabularMdp& g, const Abstraction& psi);

ValueFunction value_iteration(const TabularMdp& m, double tol = 1e-10);
// Sweep count after which value iteration is guaranteed under `tol`.
int value_iteration_sweep_bound(const TabularMdp& m, double tol);

// Greedy policy, lowest action index on ties.
Policy greedy_policy(const TabularMdp& m, const std::vector<double>& v);
std::vector<std::vector<double>> q_values(const TabularMdp& m, const std::vector<double>& v);

// Iterative evaluation to `tol`.
ValueFunction policy_evaluation(const TabularMdp& m, const Policy& policy, double tol = 1e-10);
// Direct solve of (I - gamma P_pi) v = r_pi.
std::vector<double> policy_evaluation_exact(const TabularMdp& m, const Policy& policy);

// Value iteration followed by policy iteration with exact evaluation, so
// the returned values are the optimal fixed point to machine precision.
struct OptimalSolution {
    std::vector<double> v;
    Policy policy;
};
OptimalSolution solve_optimal(const TabularMdp& m, double tol = 1e-10);

// max over z, a, s in class z of
//   |R(s,a) - R_psi(z,a)| + gamma * V_span * TV(P_Z(.|s,a), T_psi(.|z,a))
// with V_span = (max R - min R) / (1 - gamma).
double epsilon_sim(const TabularMdp& g, const Abstraction& psi, const TabularMdp& abstract);
inline constexpr const char* kEpsSimDefinition =
    "eps_sim = max_{z,a,s in S_z} |R(s,a) - R_psi(z,a)| + gamma * V_span * TV(P_Z(.|s,a), T_psi(.|z,a)); "
    "V_span = (max R - min R) / (1 - gamma); TV = half L1";

Policy lift_policy(const Policy& abstract_policy, const Abstraction& psi);

// Greedy abstract policy with at most one abstract state switched to its
// second-best action, picked to keep the abstract value loss <= eps_plan.
struct PlannedPolicy {
    Policy policy;
    double loss = 0.0;  // max_z V*(z) - V^pi(z)
    std::optional<int> perturbed_state;
};
PlannedPolicy eps_plan_policy(const TabularMdp& abstract, double eps_plan);

struct Decomposition {
    int state = 0;  // ground state of maximal loss
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double total = 0.0;  // V*_G(s) - V^pi_G(s)
};
Decomposition decompose_value_loss(const TabularMdp& g, const Abstraction& psi, const TabularMdp& abstract,
                                   const Policy& pi_l);

struct BoundReport {
    double eps_sim = 0.0;
    double eps_plan = 0.0;
    double realized_plan_loss = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    Decomposition terms;
    // |V*_G(s) - V*_abs(psi(s))| maximised over s, against eps_sim / (1 - gamma).
    double abstraction_gap = 0.0;
    double abstraction_gap_bound = 0.0;
    bool abstraction_gap_holds = false;
};
BoundReport check_ifba_bound(const TabularMdp& g, const Abstraction& psi, double eps_plan, double tol = 1e-8);

// Perturbed-model mode: the abstract model is corrupted by delta and the
// loss of the policy planned on it is compared with
// 2 eps_sim / (1 - gamma) + c * delta / (1 - gamma)^2 for a user constant c.
struct ModelErrorReport {
    double delta = 0.0;
    double loss = 0.0;
    double envelope = 0.0;
    bool within = false;
};
ModelErrorReport check_model_error(const TabularMdp& g, const Abstraction& psi, double delta, double c,
                                   std::uint64_t seed);

struct SweepSpec {
    int instances = 200;
    int min_states = 2;
    int max_states = 30;
    int min_actions = 1;
    int max_actions = 4;
    std::vector<double> gammas{0.9, 0.95, 0.99};
    std::vector<double> eps_plans{0.0, 0.1};
    std::uint64_t seed = 1;
    double delta = 0.0;  // > 0 enables the perturbed-model columns
    double model_constant = 1.0;
    double tol = 1e-8;

    // Flat "key = value" text; '#' starts a comment; lists are comma separated.
    static SweepSpec parse(const std::string& text);
    static SweepSpec load(const std::filesystem::path& file);
};

TabularMdp random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed);
Abstraction random_abstraction(int n_states, std::uint64_t seed);

struct SweepRow {
    int instance = 0;
    int n_states = 0;
    int n_actions = 0;
    int n_abstract = 0;
    double gamma = 0.0;
    BoundReport report;
    double telescoping_residual = 0.0;
    std::optional<ModelErrorReport> model;
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs = 1);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace lwm::theory

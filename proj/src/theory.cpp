#include "lwm/theory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "lwm/errors.hpp"
#include "lwm/rng.hpp"

namespace lwm::theory {

namespace {

constexpr double kRowTol = 1e-12;

double row_sum(const std::vector<double>& row) { return std::accumulate(row.begin(), row.end(), 0.0); }

double expected(const std::vector<double>& p, const std::vector<double>& v) {
    double out = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) out += p[i] * v[i];
    return out;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double out = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
    return out;
}

}  // namespace

void TabularMdp::validate() const {
    if (n_states < 1 || n_actions < 1) throw InvalidArgument("MDP needs at least one state and one action");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
    if (static_cast<int>(T.size()) != n_states || static_cast<int>(R.size()) != n_states) {
        throw InvalidArgument("transition/reward tables do not match n_states");
    }
    for (int s = 0; s < n_states; ++s) {
        if (static_cast<int>(T[s].size()) != n_actions || static_cast<int>(R[s].size()) != n_actions) {
            throw InvalidArgument("state " + std::to_string(s) + " has the wrong number of actions");
        }
        for (int a = 0; a < n_actions; ++a) {
            if (!std::isfinite(R[s][a])) throw InvalidArgument("non-finite reward");
            if (static_cast<int>(T[s][a].size()) != n_states) throw InvalidArgument("transition row has wrong length");
            for (double p : T[s][a]) {
                if (!(p >= 0.0)) throw InvalidArgument("negative transition probability");
            }
            if (std::abs(row_sum(T[s][a]) - 1.0) > kRowTol) {
                throw InvalidArgument("T[" + std::to_string(s) + "][" + std::to_string(a) + "] does not sum to 1");
            }
        }
    }
}

double TabularMdp::min_reward() const {
    double out = std::numeric_limits<double>::infinity();
    for (const auto& row : R) out = std::min(out, *std::min_element(row.begin(), row.end()));
    return out;
}

double TabularMdp::max_reward() const {
    double out = -std::numeric_limits<double>::infinity();
    for (const auto& row : R) out = std::max(out, *std::max_element(row.begin(), row.end()));
    return out;
}

void Abstraction::validate(int n_states) const {
    if (static_cast<int>(psi.size()) != n_states) throw InvalidArgument("abstraction does not cover every state");
    std::vector<bool> hit(std::max(n_abstract, 0), false);
    for (int z : psi) {
        if (z < 0 || z >= n_abstract) throw InvalidArgument("abstract index out of range");
        hit[z] = true;
    }
    for (int z = 0; z < n_abstract; ++z) {
        if (!hit[z]) throw InvalidArgument("abstract class " + std::to_string(z) + " is empty");
    }
}

std::vector<std::vector<int>> Abstraction::classes() const {
    std::vector<std::vector<int>> out(n_abstract);
    for (int s = 0; s < static_cast<int>(psi.size()); ++s) out[psi[s]].push_back(s);
    return out;
}

Abstraction Abstraction::identity(int n_states) {
    Abstraction out;
    out.psi.resize(n_states);
    std::iota(out.psi.begin(), out.psi.end(), 0);
    out.n_abstract = n_states;
    return out;
}

TabularMdp build_abstract_mdp(const TabularMdp& g, const Abstraction& psi) {
    g.validate();
    psi.validate(g.n_states);
    const auto classes = psi.classes();
    TabularMdp m;
    m.n_states = psi.n_abstract;
    m.n_actions = g.n_actions;
    m.gamma = g.gamma;
    m.T.assign(m.n_states, std::vector<std::vector<double>>(m.n_actions, std::vector<double>(m.n_states, 0.0)));
    m.R.assign(m.n_states, std::vector<double>(m.n_actions, 0.0));
    for (int z = 0; z < m.n_states; ++z) {
        const double w = 1.0 / static_cast<double>(classes[z].size());
        for (int a = 0; a < m.n_actions; ++a) {
            for (int s : classes[z]) {
                m.R[z][a] += w * g.R[s][a];
                for (int s2 = 0; s2 < g.n_states; ++s2) m.T[z][a][psi.psi[s2]] += w * g.T[s][a][s2];
            }
            const double total = row_sum(m.T[z][a]);
            for (double& p : m.T[z][a]) p /= total;
        }
    }
    return m;
}

std::vector<std::vector<double>> q_values(const TabularMdp& m, const std::vector<double>& v) {
    std::vector<std::vector<double>> q(m.n_states, std::vector<double>(m.n_actions));
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) q[s][a] = m.R[s][a] + m.gamma * expected(m.T[s][a], v);
    }
    return q;
}

Policy greedy_policy(const TabularMdp& m, const std::vector<double>& v) {
    const auto q = q_values(m, v);
    Policy out(m.n_states, 0);
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 1; a < m.n_actions; ++a) {
            if (q[s][a] > q[s][out[s]]) out[s] = a;
        }
    }
    return out;
}

int value_iteration_sweep_bound(const TabularMdp& m, double tol) {
    if (m.gamma == 0.0) return 1;
    const double span = std::max(std::abs(m.max_reward()), std::abs(m.min_reward())) / (1.0 - m.gamma);
    if (span <= tol * (1.0 - m.gamma)) return 1;
    return 1 + static_cast<int>(std::ceil(std::log(tol * (1.0 - m.gamma) / span) / std::log(m.gamma)));
}

ValueFunction value_iteration(const TabularMdp& m, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    m.validate();
    ValueFunction out;
    out.gamma = m.gamma;
    out.tolerance = tol;
    out.v.assign(m.n_states, 0.0);
    // Stopping at ||v_{k+1} - v_k|| <= tol (1 - gamma) keeps the residual of
    // the returned iterate under tol.
    const double stop = tol * (1.0 - m.gamma);
    while (true) {
        const auto q = q_values(m, out.v);
        std::vector<double> next(m.n_states);
        for (int s = 0; s < m.n_states; ++s) next[s] = *std::max_element(q[s].begin(), q[s].end());
        const double delta = sup_diff(next, out.v);
        out.v = std::move(next);
        ++out.sweeps;
        if (delta <= stop) break;
    }
    const auto q = q_values(m, out.v);
    out.residual = 0.0;
    for (int s = 0; s < m.n_states; ++s) {
        out.residual = std::max(out.residual, std::abs(*std::max_element(q[s].begin(), q[s].end()) - out.v[s]));
    }
    return out;
}

ValueFunction policy_evaluation(const TabularMdp& m, const Policy& policy, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (static_cast<int>(policy.size()) != m.n_states) throw InvalidArgument("policy is not total");
    ValueFunction out;
    out.gamma = m.gamma;
    out.tolerance = tol;
    out.v.assign(m.n_states, 0.0);
    const double stop = tol * (1.0 - m.gamma);
    while (true) {
        std::vector<double> next(m.n_states);
        for (int s = 0; s < m.n_states; ++s) {
            next[s] = m.R[s][policy[s]] + m.gamma * expected(m.T[s][policy[s]], out.v);
        }
        const double delta = sup_diff(next, out.v);
        out.v = std::move(next);
        ++out.sweeps;
        if (delta <= stop) break;
    }
    out.residual = 0.0;
    for (int s = 0; s < m.n_states; ++s) {
        const double b = m.R[s][policy[s]] + m.gamma * expected(m.T[s][policy[s]], out.v);
        out.residual = std::max(out.residual, std::abs(b - out.v[s]));
    }
    return out;
}

std::vector<double> policy_evaluation_exact(const TabularMdp& m, const Policy& policy) {
    if (static_cast<int>(policy.size()) != m.n_states) throw InvalidArgument("policy is not total");
    const int n = m.n_states;
    // Augmented matrix [I - gamma P | r], partial pivoting.
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (int s = 0; s < n; ++s) {
        const int act = policy[s];
        if (act < 0 || act >= m.n_actions) throw InvalidArgument("policy action out of range");
        for (int s2 = 0; s2 < n; ++s2) a[s][s2] = (s == s2 ? 1.0 : 0.0) - m.gamma * m.T[s][act][s2];
        a[s][n] = m.R[s][act];
    }
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        std::swap(a[col], a[pivot]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int k = col; k <= n; ++k) a[r][k] -= f * a[col][k];
        }
    }
    std::vector<double> v(n);
    for (int r = n - 1; r >= 0; --r) {
        double x = a[r][n];
        for (int k = r + 1; k < n; ++k) x -= a[r][k] * v[k];
        v[r] = x / a[r][r];
    }
    return v;
}

OptimalSolution solve_optimal(const TabularMdp& m, double tol) {
    const auto vi = value_iteration(m, tol);
    OptimalSolution out;
    out.policy = greedy_policy(m, vi.v);
    out.v = policy_evaluation_exact(m, out.policy);
    for (int iter = 0; iter < 1000; ++iter) {
        const auto q = q_values(m, out.v);
        bool changed = false;
        for (int s = 0; s < m.n_states; ++s) {
            int best = out.policy[s];
            for (int a = 0; a < m.n_actions; ++a) {
                if (q[s][a] > q[s][best] + 1e-12 * (1.0 + std::abs(q[s][best]))) best = a;
            }
            if (best != out.policy[s]) {
                out.policy[s] = best;
                changed = true;
            }
        }
        if (!changed) break;
        out.v = policy_evaluation_exact(m, out.policy);
    }
    return out;
}

double epsilon_sim(const TabularMdp& g, const Abstraction& psi, const TabularMdp& abstract) {
    psi.validate(g.n_states);
    if (abstract.n_states != psi.n_abstract || abstract.n_actions != g.n_actions) {
        throw InvalidArgument("abstract MDP does not match the abstraction");
    }
    const double v_span = (g.max_reward() - g.min_reward()) / (1.0 - g.gamma);
    double out = 0.0;
    std::vector<double> lifted(psi.n_abstract);
    for (int s = 0; s < g.n_states; ++s) {
        const int z = psi.psi[s];
        for (int a = 0; a < g.n_actions; ++a) {
            std::fill(lifted.begin(), lifted.end(), 0.0);
            for (int s2 = 0; s2 < g.n_states; ++s2) lifted[psi.psi[s2]] += g.T[s][a][s2];
            double tv = 0.0;
            for (int z2 = 0; z2 < psi.n_abstract; ++z2) tv += std::abs(lifted[z2] - abstract.T[z][a][z2]);
            tv *= 0.5;
            out = std::max(out, std::abs(g.R[s][a] - abstract.R[z][a]) + g.gamma * v_span * tv);
        }
    }
    return out;
}

Policy lift_policy(const Policy& abstract_policy, const Abstraction& psi) {
    Policy out(psi.psi.size());
    for (std::size_t s = 0; s < psi.psi.size(); ++s) {
        const int z = psi.psi[s];
        if (z < 0 || z >= static_cast<int>(abstract_policy.size())) {
            throw InvalidArgument("abstract policy undefined on class " + std::to_string(z));
        }
        out[s] = abstract_policy[z];
    }
    return out;
}

PlannedPolicy eps_plan_policy(const TabularMdp& abstract, double eps_plan) {
    if (!(eps_plan >= 0.0)) throw InvalidArgument("eps_plan must be >= 0");
    const auto opt = solve_optimal(abstract);
    PlannedPolicy out{opt.policy, 0.0, std::nullopt};
    if (eps_plan == 0.0 || abstract.n_actions < 2) return out;

    const auto q = q_values(abstract, opt.v);
    double best_loss = std::numeric_limits<double>::infinity();
    for (int z = 0; z < abstract.n_states; ++z) {
        int second = -1;
        for (int a = 0; a < abstract.n_actions; ++a) {
            if (a == opt.policy[z]) continue;
            if (second < 0 || q[z][a] > q[z][second]) second = a;
        }
        Policy candidate = opt.policy;
        candidate[z] = second;
        const auto v = policy_evaluation_exact(abstract, candidate);
        double loss = 0.0;
        for (int k = 0; k < abstract.n_states; ++k) loss = std::max(loss, opt.v[k] - v[k]);
        if (loss < best_loss) {
            best_loss = loss;
            if (loss <= eps_plan) out = PlannedPolicy{candidate, loss, z};
        }
    }
    return out;
}

Decomposition decompose_value_loss(const TabularMdp& g, const Abstraction& psi, const TabularMdp& abstract,
                                   const Policy& pi_l) {
    const auto ground = solve_optimal(g);
    const auto abs_opt = solve_optimal(abstract);
    const auto v_l_abs = policy_evaluation_exact(abstract, pi_l);
    const auto v_f = policy_evaluation_exact(g, lift_policy(pi_l, psi));

    Decomposition d;
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < g.n_states; ++s) {
        const double loss = ground.v[s] - v_f[s];
        if (loss > worst) {
            worst = loss;
            d.state = s;
        }
    }
    const int s = d.state;
    const int z = psi.psi[s];
    d.a = ground.v[s] - abs_opt.v[z];
    d.b = abs_opt.v[z] - v_l_abs[z];
    d.c = v_l_abs[z] - v_f[s];
    d.total = ground.v[s] - v_f[s];
    return d;
}

BoundReport check_ifba_bound(const TabularMdp& g, const Abstraction& psi, double eps_plan, double tol) {
    const TabularMdp abstract = build_abstract_mdp(g, psi);
    const auto planned = eps_plan_policy(abstract, eps_plan);

    BoundReport r;
    r.eps_sim = epsilon_sim(g, psi, abstract);
    r.eps_plan = eps_plan;
    r.realized_plan_loss = planned.loss;
    r.terms = decompose_value_loss(g, psi, abstract, planned.policy);
    r.lhs = r.terms.total;
    r.rhs = 2.0 * r.eps_sim / (1.0 - g.gamma) + eps_plan;
    r.holds = r.lhs <= r.rhs + tol;

    const auto ground = solve_optimal(g);
    const auto abs_opt = solve_optimal(abstract);
    for (int s = 0; s < g.n_states; ++s) {
        r.abstraction_gap = std::max(r.abstraction_gap, std::abs(ground.v[s] - abs_opt.v[psi.psi[s]]));
    }
    r.abstraction_gap_bound = r.eps_sim / (1.0 - g.gamma);
    r.abstraction_gap_holds = r.abstraction_gap <= r.abstraction_gap_bound + tol;
    return r;
}

ModelErrorReport check_model_error(const TabularMdp& g, const Abstraction& psi, double delta, double c,
                                   std::uint64_t seed) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in [0, 1]");
    const TabularMdp abstract = build_abstract_mdp(g, psi);
    TabularMdp noisy = abstract;
    SplitMix64 rng(seed);
    for (int z = 0; z < noisy.n_states; ++z) {
        for (int a = 0; a < noisy.n_actions; ++a) {
            noisy.R[z][a] += delta * (2.0 * rng.uniform() - 1.0);
            std::vector<double> mix(noisy.n_states);
            for (double& p : mix) p = rng.uniform();
            const double total = row_sum(mix);
            for (int z2 = 0; z2 < noisy.n_states; ++z2) {
                noisy.T[z][a][z2] = (1.0 - delta) * noisy.T[z][a][z2] + delta * mix[z2] / total;
            }
            const double t = row_sum(noisy.T[z][a]);
            for (double& p : noisy.T[z][a]) p /= t;
        }
    }
    const auto plan = solve_optimal(noisy);
    const auto ground = solve_optimal(g);
    const auto v = policy_evaluation_exact(g, lift_policy(plan.policy, psi));

    ModelErrorReport out;
    out.delta = delta;
    for (int s = 0; s < g.n_states; ++s) out.loss = std::max(out.loss, ground.v[s] - v[s]);
    const double one_minus = 1.0 - g.gamma;
    out.envelope = 2.0 * epsilon_sim(g, psi, abstract) / one_minus + c * delta / (one_minus * one_minus);
    out.within = out.loss <= out.envelope + 1e-8;
    return out;
}

// ---------------------------------------------------------------------------

TabularMdp random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed) {
    if (n_states < 1 || n_actions < 1) throw InvalidArgument("MDP needs at least one state and one action");
    SplitMix64 rng(seed);
    TabularMdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.gamma = gamma;
    m.T.assign(n_states, std::vector<std::vector<double>>(n_actions, std::vector<double>(n_states, 0.0)));
    m.R.assign(n_states, std::vector<double>(n_actions, 0.0));
    std::vector<int> order(n_states);
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            m.R[s][a] = 2.0 * rng.uniform() - 1.0;
            // Sparse rows: a handful of successors with random weights.
            const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(n_states, 4))));
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            double total = 0.0;
            for (int i = 0; i < k; ++i) {
                const double w = 0.05 + rng.uniform();
                m.T[s][a][order[i]] = w;
                total += w;
            }
            for (double& p : m.T[s][a]) p /= total;
        }
    }
    return m;
}

Abstraction random_abstraction(int n_states, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Abstraction out;
    out.n_abstract = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_states)));
    std::vector<int> order(n_states);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    out.psi.assign(n_states, 0);
    for (int i = 0; i < n_states; ++i) {
        out.psi[order[i]] = i < out.n_abstract ? i : static_cast<int>(rng.below(out.n_abstract));
    }
    return out;
}

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidArgument("bad number for '" + key + "': " + v);
    }
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x)) throw InvalidArgument("'" + key + "' must be an integer");
    return static_cast<int>(x);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw InvalidArgument("'" + key + "' needs at least one value");
    return out;
}

}  // namespace

SweepSpec SweepSpec::parse(const std::string& text) {
    SweepSpec spec;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidArgument("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "instances") spec.instances = to_int(key, value);
        else if (key == "min_states") spec.min_states = to_int(key, value);
        else if (key == "max_states") spec.max_states = to_int(key, value);
        else if (key == "min_actions") spec.min_actions = to_int(key, value);
        else if (key == "max_actions") spec.max_actions = to_int(key, value);
        else if (key == "gammas") spec.gammas = to_list(key, value);
        else if (key == "eps_plans") spec.eps_plans = to_list(key, value);
        else if (key == "seed") spec.seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "delta") spec.delta = to_double(key, value);
        else if (key == "model_constant") spec.model_constant = to_double(key, value);
        else if (key == "tol") spec.tol = to_double(key, value);
        else throw InvalidArgument("unknown sweep key '" + key + "'");
    }
    if (spec.instances < 1) throw InvalidArgument("instances must be >= 1");
    if (spec.min_states < 1 || spec.max_states < spec.min_states) throw InvalidArgument("bad state range");
    if (spec.min_actions < 1 || spec.max_actions < spec.min_actions) throw InvalidArgument("bad action range");
    for (double g : spec.gammas) {
        if (!(g >= 0.0 && g < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
    }
    for (double e : spec.eps_plans) {
        if (!(e >= 0.0)) throw InvalidArgument("eps_plan must be >= 0");
    }
    return spec;
}

SweepSpec SweepSpec::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw InvalidArgument("cannot read " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs) {
    const std::size_t per = spec.eps_plans.size();
    std::vector<SweepRow> rows(static_cast<std::size_t>(spec.instances) * per);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < spec.instances; i = next++) {
            SplitMix64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
            const int n = spec.min_states + static_cast<int>(rng.below(spec.max_states - spec.min_states + 1));
            const int k = spec.min_actions + static_cast<int>(rng.below(spec.max_actions - spec.min_actions + 1));
            const double gamma = spec.gammas[i % spec.gammas.size()];
            const TabularMdp g = random_mdp(n, k, gamma, rng.next());
            const Abstraction psi = random_abstraction(n, rng.next());
            const std::uint64_t model_seed = rng.next();
            for (std::size_t e = 0; e < per; ++e) {
                SweepRow& row = rows[i * per + e];
                row.instance = i;
                row.n_states = n;
                row.n_actions = k;
                row.n_abstract = psi.n_abstract;
                row.gamma = gamma;
                row.report = check_ifba_bound(g, psi, spec.eps_plans[e], spec.tol);
                const auto& t = row.report.terms;
                row.telescoping_residual = std::abs(t.a + t.b + t.c - t.total);
                if (spec.delta > 0.0) row.model = check_model_error(g, psi, spec.delta, spec.model_constant, model_seed);
            }
        }
    };
    const int n = std::max(1, std::min(jobs, spec.instances));
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    const bool model = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.model.has_value(); });
    out << "# " << kEpsSimDefinition << '\n';
    out << "instance,n_states,n_actions,n_abstract,gamma,eps_sim,eps_plan,lhs,rhs,holds,A,B,C,"
           "realized_plan_loss,telescoping_residual,abstraction_gap,abstraction_gap_bound,abstraction_gap_holds";
    if (model) out << ",delta,model_loss,model_envelope,model_within";
    out << '\n';
    std::ostringstream line;
    line.precision(12);
    for (const auto& r : rows) {
        line.str("");
        const auto& b = r.report;
        line << r.instance << ',' << r.n_states << ',' << r.n_actions << ',' << r.n_abstract << ',' << r.gamma << ','
             << b.eps_sim << ',' << b.eps_plan << ',' << b.lhs << ',' << b.rhs << ',' << (b.holds ? "true" : "false")
             << ',' << b.terms.a << ',' << b.terms.b << ',' << b.terms.c << ',' << b.realized_plan_loss << ','
             << r.telescoping_residual << ',' << b.abstraction_gap << ',' << b.abstraction_gap_bound << ','
             << (b.abstraction_gap_holds ? "true" : "false");
        if (model) {
            if (r.model) {
                line << ',' << r.model->delta << ',' << r.model->loss << ',' << r.model->envelope << ','
                     << (r.model->within ? "true" : "false");
            } else {
                line << ",,,,";
            }
        }
        out << line.str() << '\n';
    }
}

}  // namespace lwm::theory

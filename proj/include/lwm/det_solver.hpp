#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <unordered_map>
#include <vector>

namespace lwm {

// Optimal values of a deterministic, discounted MDP given by an expansion
// function. Solves the reachable closure of each queried state by policy
// iteration with exact evaluation of the policy's functional graph, and
// keeps every solved value for later queries.
//
// V(s) = max_a [ r(s,a) - step_penalty + gamma * (terminal ? 0 : V(s')) ]
// A state with no edges is absorbing with value 0.
template <class State, class Hash = std::hash<State>>
class DeterministicSolver {
public:
    struct Edge {
        State next;
        double reward = 0.0;
        bool terminal = false;
    };
    using Expand = std::function<std::vector<Edge>(const State&)>;

    DeterministicSolver(Expand expand, double gamma, double step_penalty)
        : expand_(std::move(expand)), gamma_(gamma), penalty_(step_penalty) {}

    double gamma() const { return gamma_; }
    double step_penalty() const { return penalty_; }
    std::size_t solved_states() const { return values_.size(); }

    double value(const State& s) {
        auto it = values_.find(s);
        if (it != values_.end()) return it->second;
        solve_from(s);
        return values_.at(s);
    }

private:
    struct Arc {
        long succ = -1;     // index into the closure, -1 when the arc leaves it
        double cost = 0.0;  // immediate term plus any discounted boundary value
    };

    void solve_from(const State& root) {
        std::unordered_map<State, long, Hash> index;
        std::vector<State> states;
        std::vector<std::vector<Arc>> arcs;
        index.emplace(root, 0);
        states.push_back(root);
        for (std::size_t i = 0; i < states.size(); ++i) {
            std::vector<Arc> out;
            for (auto& e : expand_(states[i])) {
                Arc arc;
                arc.cost = e.reward - penalty_;
                if (!e.terminal) {
                    if (auto known = values_.find(e.next); known != values_.end()) {
                        arc.cost += gamma_ * known->second;
                    } else {
                        auto [pos, fresh] = index.emplace(e.next, static_cast<long>(states.size()));
                        if (fresh) states.push_back(std::move(e.next));
                        arc.succ = pos->second;
                    }
                }
                out.push_back(arc);
            }
            arcs.push_back(std::move(out));
        }

        const std::size_t n = states.size();
        std::vector<std::size_t> policy(n, 0);
        std::vector<double> v(n, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t a = 1; a < arcs[s].size(); ++a) {
                if (arcs[s][a].cost > arcs[s][policy[s]].cost) policy[s] = a;
            }
        }
        for (;;) {
            evaluate(arcs, policy, v);
            bool changed = false;
            for (std::size_t s = 0; s < n; ++s) {
                if (arcs[s].empty()) continue;
                double current = q(arcs[s][policy[s]], v);
                for (std::size_t a = 0; a < arcs[s].size(); ++a) {
                    double cand = q(arcs[s][a], v);
                    if (cand > current + 1e-12 * (1.0 + std::abs(current))) {
                        current = cand;
                        policy[s] = a;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        for (std::size_t s = 0; s < n; ++s) values_.emplace(states[s], v[s]);
    }

    double q(const Arc& arc, const std::vector<double>& v) const {
        return arc.cost + (arc.succ >= 0 ? gamma_ * v[static_cast<std::size_t>(arc.succ)] : 0.0);
    }

    // Exact values of a fixed policy: each state has one successor, so the
    // graph is a set of chains feeding into cycles or exits.
    void evaluate(const std::vector<std::vector<Arc>>& arcs, const std::vector<std::size_t>& policy,
                  std::vector<double>& v) const {
        const std::size_t n = arcs.size();
        std::vector<char> mark(n, 0);  // 0 new, 1 on path, 2 done
        std::vector<long> path;
        for (std::size_t start = 0; start < n; ++start) {
            if (mark[start]) continue;
            path.clear();
            long cur = static_cast<long>(start);
            long cycle_head = -1;
            while (true) {
                auto c = static_cast<std::size_t>(cur);
                if (mark[c] == 2) break;
                if (mark[c] == 1) {
                    cycle_head = cur;
                    break;
                }
                mark[c] = 1;
                path.push_back(cur);
                if (arcs[c].empty()) break;
                long next = arcs[c][policy[c]].succ;
                if (next < 0) break;
                cur = next;
            }
            std::size_t tail_end = path.size();
            if (cycle_head >= 0) {
                std::size_t first = 0;
                while (path[first] != cycle_head) ++first;
                double sum = 0.0;
                double disc = 1.0;
                for (std::size_t j = first; j < path.size(); ++j) {
                    sum += disc * arcs[static_cast<std::size_t>(path[j])][policy[static_cast<std::size_t>(path[j])]].cost;
                    disc *= gamma_;
                }
                const auto head = static_cast<std::size_t>(cycle_head);
                v[head] = sum / (1.0 - disc);
                mark[head] = 2;
                for (std::size_t j = path.size() - 1; j > first; --j) {
                    auto s = static_cast<std::size_t>(path[j]);
                    const Arc& arc = arcs[s][policy[s]];
                    v[s] = arc.cost + gamma_ * v[static_cast<std::size_t>(arc.succ)];
                    mark[s] = 2;
                }
                tail_end = first;
            }
            for (std::size_t j = tail_end; j-- > 0;) {
                auto s = static_cast<std::size_t>(path[j]);
                if (arcs[s].empty()) {
                    v[s] = 0.0;
                } else {
                    v[s] = q(arcs[s][policy[s]], v);
                }
                mark[s] = 2;
            }
        }
    }

    Expand expand_;
    double gamma_;
    double penalty_;
    std::unordered_map<State, double, Hash> values_;
};

}  // namespace lwm

#pragma once

// Test-only helpers: scripted backends and a brute-force lookahead that
// walks the true environment dynamics instead of prompts.

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "lwm/envs/crafter.hpp"
#include "lwm/envs/frozen_lake.hpp"
#include "lwm/llm/backend.hpp"
#include "lwm/llm/oracle.hpp"

namespace lwm::testing {

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(LWM_TEST_DATA) / rel; }

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("lwm_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline LlmResult reply(const std::string& function, nlohmann::json args) {
    if (!args.contains("thought")) args["thought"] = "scripted";
    return LlmResult::from_arguments(function_schema(function), args);
}

// Depth-limited max backup straight over the environment:
//   Q_d(s,a) = r - penalty + gamma * (terminal ? 0 : W_{d-1}(s'))
//   W_0(s) = V(s), W_d(s) = max_a Q_d(s,a)
// Returns the first action attaining the maximum at the root.
template <class State, class Step, class Value>
std::string brute_force_plan(const State& root, const std::vector<std::string>& actions, int depth, double gamma,
                             double penalty, Step step, Value value) {
    struct Rec {
        const std::vector<std::string>& actions;
        double gamma;
        double penalty;
        Step& step;
        Value& value;
        double q(const State& s, const std::string& a, int d) {
            State next = s;
            auto [r, terminal] = step(next, a);
            const double v = terminal ? 0.0 : w(next, d - 1);
            return r - penalty + gamma * v;
        }
        double w(const State& s, int d) {
            if (d <= 0) return value(s);
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& a : actions) best = std::max(best, q(s, a, d));
            return best;
        }
    } rec{actions, gamma, penalty, step, value};
    std::size_t best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const double q = rec.q(root, actions[i], depth);
        if (q > best_q) {
            best_q = q;
            best = i;
        }
    }
    return actions[best];
}

inline std::string brute_force_lake(FrozenLakeModel& model, GridPos pos, int depth, double gamma, double penalty) {
    const auto& board = model.board();
    return brute_force_plan(
        pos, frozen_lake_actions(), depth, gamma, penalty,
        [&](GridPos& p, const std::string& a) {
            LakeMove m = frozen_lake_move(board, p, a);
            p = m.pos;
            return std::pair{m.reward, m.terminal};
        },
        [&](const GridPos& p) { return model.board_value(board, p, gamma, penalty); });
}

inline std::string brute_force_crafter(CrafterModel& model, const CrafterState& state, int depth, double gamma,
                                       double penalty) {
    return brute_force_plan(
        state, crafter_actions(), depth, gamma, penalty,
        [&](CrafterState& s, const std::string& a) {
            CrafterOutcome o = crafter_apply(s, crafter_action_index(a));
            return std::pair{o.reward, o.terminal};
        },
        [&](const CrafterState& s) { return model.state_value(s, gamma, penalty); });
}

}  // namespace lwm::testing

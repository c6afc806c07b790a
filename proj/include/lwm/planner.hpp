#pragma once

#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lwm/core_types.hpp"
#include "lwm/llm/backend.hpp"
#include "lwm/rng.hpp"

namespace lwm {

struct PlanConfig {
    int depth = 3;
    int branch = 4;
    double gamma = 0.99;
    double step_penalty = 0.01;
    // Evaluate root branches on worker threads. The chosen action does not
    // depend on this.
    bool parallel = false;

    // Throws InvalidArgument on out-of-range values.
    void validate() const;
};

// Q = r' - step_penalty + gamma * v_next
double compute_q(double r_prime, double step_penalty, double gamma, double v_next);

enum class QueryKind { Propose, Simulate, Value };
std::string_view query_kind_name(QueryKind kind);

// SHA-256 over (kind, obs, action, history lines, facts digest).
std::string cache_key(QueryKind kind, const Observation& obs, const std::optional<ActionName>& action,
                      const std::deque<std::string>& history, const std::string& facts_digest);

// Observations known to be terminal from real experience.
class TerminalSet {
public:
    void insert(const Observation& obs);
    bool contains(const Observation& obs) const;
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::set<Observation> items_;
};

struct PlanStats {
    std::size_t backend_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t failed_branches = 0;
};

// Depth-limited lookahead over model-simulated transitions.
class Planner {
public:
    Planner(Backend& backend, std::string env_description, std::vector<ActionName> allowed, PlanConfig config,
            std::uint64_t seed = 0);

    // Chooses an action for `obs`. Clears the per-call cache first.
    ActionName plan(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts);

    // Node value at `depth` under the current cache scope.
    double estimate_node_value(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts,
                               int depth);

    // Q-values of the last root expansion, in proposal order.
    const std::vector<std::pair<ActionName, double>>& last_root() const { return last_root_; }
    const PlanStats& last_stats() const { return stats_; }

    TerminalSet& terminals() { return terminals_; }
    const PlanConfig& config() const { return config_; }

    // One JSON object per evaluated branch: {depth, obs, action, r, v_next, q}.
    void set_trace(std::function<void(const nlohmann::json&)> sink) { trace_ = std::move(sink); }

    void clear_cache();

private:
    LlmResult cached(QueryKind kind, const Observation& obs, const std::optional<ActionName>& action,
                     const HistoryBuffer& history, const FactMemory& facts, const std::function<LlmCall()>& make);
    std::vector<ActionName> propose(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts);
    double leaf_value(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts);
    // Q of one branch; nullopt when the branch failed.
    std::optional<double> branch_q(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts,
                                   const ActionName& action, int depth);

    Backend& backend_;
    std::string env_description_;
    std::vector<ActionName> allowed_;
    PlanConfig config_;
    SplitMix64 rng_;
    TerminalSet terminals_;

    std::mutex cache_mu_;
    std::map<std::string, std::shared_future<LlmResult>> cache_;
    PlanStats stats_;
    std::vector<std::pair<ActionName, double>> last_root_;

    std::mutex trace_mu_;
    std::function<void(const nlohmann::json&)> trace_;
};

// One-shot form with a fresh planner.
ActionName plan_action(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts,
                       const PlanConfig& config, Backend& backend, const std::string& env_description,
                       const std::vector<ActionName>& allowed, std::uint64_t seed = 0);

}  // namespace lwm

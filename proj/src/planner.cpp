#include "lwm/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lwm/digest.hpp"
#include "lwm/errors.hpp"
#include "lwm/log.hpp"
#include "lwm/prompts.hpp"

namespace lwm {

void PlanConfig::validate() const {
    if (depth < 1) throw InvalidArgument("planning depth must be >= 1");
    if (branch < 1) throw InvalidArgument("branching factor must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
    if (!(step_penalty >= 0.0)) throw InvalidArgument("step penalty must be >= 0");
}

double compute_q(double r_prime, double step_penalty, double gamma, double v_next) {
    return r_prime - step_penalty + gamma * v_next;
}

std::string_view query_kind_name(QueryKind kind) {
    switch (kind) {
        case QueryKind::Propose: return "propose";
        case QueryKind::Simulate: return "simulate";
        case QueryKind::Value: return "value";
    }
    return "?";
}

std::string cache_key(QueryKind kind, const Observation& obs, const std::optional<ActionName>& action,
                      const std::deque<std::string>& history, const std::string& facts_digest) {
    nlohmann::json id = nlohmann::json::array();
    id.push_back(query_kind_name(kind));
    id.push_back(obs);
    id.push_back(action ? nlohmann::json(*action) : nlohmann::json(nullptr));
    id.push_back(nlohmann::json(std::vector<std::string>(history.begin(), history.end())));
    id.push_back(facts_digest);
    return sha256_hex(id.dump());
}

void TerminalSet::insert(const Observation& obs) {
    std::lock_guard lock(mu_);
    items_.insert(obs);
}

bool TerminalSet::contains(const Observation& obs) const {
    std::lock_guard lock(mu_);
    return items_.contains(obs);
}

std::size_t TerminalSet::size() const {
    std::lock_guard lock(mu_);
    return items_.size();
}

Planner::Planner(Backend& backend, std::string env_description, std::vector<ActionName> allowed, PlanConfig config,
                 std::uint64_t seed)
    : backend_(backend),
      env_description_(std::move(env_description)),
      allowed_(std::move(allowed)),
      config_(config),
      rng_(seed) {
    config_.validate();
    if (allowed_.empty()) throw InvalidArgument("planner needs at least one allowed action");
}

void Planner::clear_cache() {
    std::lock_guard lock(cache_mu_);
    cache_.clear();
    stats_ = {};
}

LlmResult Planner::cached(QueryKind kind, const Observation& obs, const std::optional<ActionName>& action,
                          const HistoryBuffer& history, const FactMemory& facts,
                          const std::function<LlmCall()>& make) {
    const std::string key = cache_key(kind, obs, action, history.lines(), facts.digest());
    std::promise<LlmResult> promise;
    std::shared_future<LlmResult> result;
    bool owner = false;
    {
        std::lock_guard lock(cache_mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            result = it->second;
            ++stats_.cache_hits;
        } else {
            result = promise.get_future().share();
            cache_.emplace(key, result);
            ++stats_.backend_calls;
            owner = true;
        }
    }
    if (owner) {
        try {
            promise.set_value(complete(backend_, make()));
        } catch (...) {
            promise.set_exception(std::current_exception());
        }
    }
    return result.get();
}

std::vector<ActionName> Planner::propose(const Observation& obs, const HistoryBuffer& history,
                                         const FactMemory& facts) {
    LlmResult r = cached(QueryKind::Propose, obs, std::nullopt, history, facts, [&] {
        return prompts::propose_actions_call(env_description_, facts, obs, history, allowed_, config_.branch);
    });
    std::vector<ActionName> out;
    for (const auto& a : r.actions()) {
        if (std::find(allowed_.begin(), allowed_.end(), a) == allowed_.end()) {
            warn("proposer suggested unknown action '" + a + "'; ignored");
            continue;
        }
        if (std::find(out.begin(), out.end(), a) != out.end()) continue;
        out.push_back(a);
        if (static_cast<int>(out.size()) == config_.branch) break;
    }
    return out;
}

double Planner::leaf_value(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts) {
    LlmResult r = cached(QueryKind::Value, obs, std::nullopt, history, facts, [&] {
        return prompts::estimate_value_call(env_description_, facts, obs, history, config_.gamma);
    });
    const double v = r.value();
    if (!std::isfinite(v)) throw EstimationError("value estimate is not finite");
    return v;
}

double Planner::estimate_node_value(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts,
                                    int depth) {
    if (depth <= 0 || terminals_.contains(obs)) return leaf_value(obs, history, facts);
    std::vector<ActionName> actions = propose(obs, history, facts);
    if (actions.empty()) return leaf_value(obs, history, facts);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : actions) {
        if (auto q = branch_q(obs, history, facts, a, depth)) best = std::max(best, *q);
    }
    if (best == -std::numeric_limits<double>::infinity()) {
        throw PlanningError("every branch failed below '" + obs + "'");
    }
    return best;
}

std::optional<double> Planner::branch_q(const Observation& obs, const HistoryBuffer& history,
                                        const FactMemory& facts, const ActionName& action, int depth) {
    try {
        LlmResult sim = cached(QueryKind::Simulate, obs, action, history, facts, [&] {
            return prompts::simulate_step_call(env_description_, facts, obs, history, action);
        });
        const std::string next_obs = sim.next_observation();
        const double r = sim.reward();
        const bool done = sim.done();
        if (next_obs.empty()) throw SimulationError("simulator returned an empty observation");
        double v_next = 0.0;
        if (!done) v_next = estimate_node_value(next_obs, history.with_pair(action, next_obs), facts, depth - 1);
        const double q = compute_q(r, config_.step_penalty, config_.gamma, v_next);
        if (trace_) {
            std::lock_guard lock(trace_mu_);
            trace_({{"depth", depth}, {"obs", obs}, {"action", action}, {"r", r}, {"v_next", v_next}, {"q", q}});
        }
        return q;
    } catch (const MissingCassette&) {
        throw;
    } catch (const Error& e) {
        {
            std::lock_guard lock(cache_mu_);
            ++stats_.failed_branches;
        }
        warn("branch '" + action + "' from '" + obs + "' failed: " + e.what());
        return std::nullopt;
    }
}

ActionName Planner::plan(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts) {
    clear_cache();
    last_root_.clear();
    std::vector<ActionName> actions = propose(obs, history, facts);
    if (actions.empty()) {
        warn("proposer returned no actions; acting randomly");
        return allowed_[rng_.below(allowed_.size())];
    }

    std::vector<std::optional<double>> qs(actions.size());
    if (config_.parallel && actions.size() > 1) {
        std::vector<std::future<std::optional<double>>> jobs;
        for (const auto& a : actions) {
            jobs.push_back(std::async(std::launch::async, [&, a] { return branch_q(obs, history, facts, a, config_.depth); }));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) qs[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < actions.size(); ++i) qs[i] = branch_q(obs, history, facts, actions[i], config_.depth);
    }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const double q = qs[i].value_or(-std::numeric_limits<double>::infinity());
        last_root_.emplace_back(actions[i], q);
        if (!qs[i]) continue;
        if (!best || *qs[i] > *qs[*best]) best = i;
    }
    if (!best) throw PlanningError("all root branches failed for '" + obs + "'");
    return actions[*best];
}

ActionName plan_action(const Observation& obs, const HistoryBuffer& history, const FactMemory& facts,
                       const PlanConfig& config, Backend& backend, const std::string& env_description,
                       const std::vector<ActionName>& allowed, std::uint64_t seed) {
    Planner planner(backend, env_description, allowed, config, seed);
    return planner.plan(obs, history, facts);
}

}  // namespace lwm

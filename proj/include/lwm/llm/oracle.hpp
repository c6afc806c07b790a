#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "lwm/det_solver.hpp"
#include "lwm/envs/crafter.hpp"
#include "lwm/envs/frozen_lake.hpp"
#include "lwm/fact_engine.hpp"
#include "lwm/llm/backend.hpp"

namespace lwm {

// What the emulated model is allowed to know. `Full` reads the true world;
// `FactsOnly` plays a belief world where anything no fact asserts takes
// its default (ice on the lake, grass in Crafter).
enum class Visibility { Full, FactsOnly };

struct OracleQuery {
    Observation obs;
    std::vector<std::string> history;  // formatted "Obs:"/"Act:" lines, old -> new
    std::vector<AtomicFact> facts;
};

struct SimulatedStep {
    Observation next_obs;
    double reward = 0.0;
    bool done = false;
};

// Ground truth and belief dynamics of one environment, as the oracle sees them.
class EnvModel {
public:
    virtual ~EnvModel() = default;

    // Throws SimulationError when the observation cannot be resolved.
    virtual SimulatedStep simulate(const OracleQuery& q, const ActionName& action, Visibility vis) = 0;
    // Optimal discounted value including the step penalty stream; 0 for a
    // terminal observation. Throws EstimationError on unparseable input.
    virtual double value(const OracleQuery& q, Visibility vis, double gamma, double step_penalty) = 0;
    virtual bool is_terminal(const Observation& obs) const = 0;
    // New facts revealed by an episode, minus the ones already known.
    virtual std::vector<AtomicFact> extract_facts(const ParsedTrajectory& episode,
                                                  const std::vector<AtomicFact>& known) = 0;
    // Canonical de-duplication plus merging of facts about the same cell.
    virtual std::vector<AtomicFact> compress(const std::vector<AtomicFact>& facts) = 0;
    virtual std::string lesson(const ParsedTrajectory& episode) = 0;
    virtual const std::vector<ActionName>& actions() const = 0;
};

struct GridPosHash {
    std::size_t operator()(const GridPos& p) const noexcept {
        return std::hash<long long>{}((static_cast<long long>(p.row) << 32) ^ static_cast<unsigned>(p.col));
    }
};

class FrozenLakeModel final : public EnvModel {
public:
    explicit FrozenLakeModel(FrozenLakeBoard board);

    SimulatedStep simulate(const OracleQuery& q, const ActionName& action, Visibility vis) override;
    double value(const OracleQuery& q, Visibility vis, double gamma, double step_penalty) override;
    bool is_terminal(const Observation& obs) const override;
    std::vector<AtomicFact> extract_facts(const ParsedTrajectory& episode,
                                          const std::vector<AtomicFact>& known) override;
    std::vector<AtomicFact> compress(const std::vector<AtomicFact>& facts) override;
    std::string lesson(const ParsedTrajectory& episode) override;
    const std::vector<ActionName>& actions() const override { return frozen_lake_actions(); }

    const FrozenLakeBoard& board() const { return board_; }
    // Lake as believed from the facts alone.
    FrozenLakeBoard belief_board(const std::vector<AtomicFact>& facts) const;
    // Optimal value of a position on a board (terminal tiles are 0).
    double board_value(const FrozenLakeBoard& board, GridPos pos, double gamma, double step_penalty);

private:
    FrozenLakeBoard board_;
    std::map<std::string, std::unique_ptr<DeterministicSolver<GridPos, GridPosHash>>> solvers_;
};

struct CrafterStateHash {
    std::size_t operator()(const CrafterState& s) const noexcept;
};

class CrafterModel final : public EnvModel {
public:
    // `live` (optional) is the environment being played; full visibility
    // anchors history replay to its current state.
    explicit CrafterModel(CrafterWorld world, const CrafterEnv* live = nullptr);

    SimulatedStep simulate(const OracleQuery& q, const ActionName& action, Visibility vis) override;
    double value(const OracleQuery& q, Visibility vis, double gamma, double step_penalty) override;
    bool is_terminal(const Observation& obs) const override;
    std::vector<AtomicFact> extract_facts(const ParsedTrajectory& episode,
                                          const std::vector<AtomicFact>& known) override;
    std::vector<AtomicFact> compress(const std::vector<AtomicFact>& facts) override;
    std::string lesson(const ParsedTrajectory& episode) override;
    const std::vector<ActionName>& actions() const override { return crafter_actions(); }

    void set_live(const CrafterEnv* live) { live_ = live; }

    // Full state behind an observation. Throws SimulationError when the
    // observation does not parse.
    CrafterState resolve(const OracleQuery& q, Visibility vis) const;
    double state_value(const CrafterState& s, double gamma, double step_penalty);

private:
    std::optional<CrafterState> replay_from(const CrafterState& anchor, const OracleQuery& q) const;

    CrafterWorld world_;
    const CrafterEnv* live_;
    std::map<std::pair<double, double>, std::unique_ptr<DeterministicSolver<CrafterState, CrafterStateHash>>> solvers_;
};

struct OracleConfig {
    Visibility visibility = Visibility::Full;
    // Proposer order; allowed actions missing from it follow in prompt order.
    // Empty: rank by one-step lookahead.
    std::vector<ActionName> proposal_order;
    double step_penalty = 0.01;
    // Discount for the greedy ReAct emulation (the ReAct prompt has none).
    double gamma = 0.99;
};

// Deterministic stand-in for the LLM: reads the rendered prompt back and
// answers from exact (or belief-world) dynamics.
class OracleBackend final : public Backend {
public:
    OracleBackend(std::shared_ptr<EnvModel> model, OracleConfig config = {});

    LlmResult complete(const LlmCall& call) override;
    std::string name() const override {
        return config_.visibility == Visibility::Full ? "oracle" : "oracle-facts";
    }

    const OracleConfig& config() const { return config_; }
    EnvModel& model() { return *model_; }

private:
    OracleQuery query_from(const std::string& prompt, std::string_view obs_header) const;
    double one_step_q(const OracleQuery& q, const ActionName& action);

    std::shared_ptr<EnvModel> model_;
    OracleConfig config_;
    std::mutex mu_;
};

}  // namespace lwm

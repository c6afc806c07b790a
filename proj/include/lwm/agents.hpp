#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lwm/core_types.hpp"
#include "lwm/envs/environment.hpp"
#include "lwm/fact_engine.hpp"
#include "lwm/llm/backend.hpp"
#include "lwm/planner.hpp"
#include "lwm/rng.hpp"

namespace lwm {

class LessonBuffer {
public:
    static constexpr std::size_t kDefaultCapacity = 5;
    explicit LessonBuffer(std::size_t capacity = kDefaultCapacity);

    void push(std::string lesson);
    const std::deque<std::string>& items() const { return items_; }
    std::vector<std::string> to_vector() const { return {items_.begin(), items_.end()}; }
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }

    friend bool operator==(const LessonBuffer&, const LessonBuffer&) = default;

private:
    std::size_t capacity_;
    std::deque<std::string> items_;
};

// Uniform draw. Throws InvalidArgument for an empty list.
ActionName random_act(const std::vector<ActionName>& allowed, SplitMix64& rng);

// One ReAct step. An action outside `allowed` gets one re-prompt, then a
// random legal action with a warning.
std::pair<std::string, ActionName> react_act(Backend& backend, const std::string& env_description,
                                             const Observation& obs, const HistoryBuffer& history,
                                             const std::vector<ActionName>& allowed, const std::string& context_block,
                                             SplitMix64& rng);

// Appends the backend's lesson. Backend failures and empty lessons leave the
// buffer unchanged (with a warning).
LessonBuffer reflexion_reflect(Backend& backend, const std::string& env_description,
                               const TrajectorySummary& summary, LessonBuffer lessons);

struct AgentOptions {
    std::size_t history_capacity = HistoryBuffer::kDefaultCapacity;
    std::size_t fact_capacity = FactMemory::kDefaultCapacity;
    std::size_t lesson_capacity = LessonBuffer::kDefaultCapacity;
    bool compress_facts = true;
    PlanConfig plan;
    std::uint64_t seed = 0;
};

// Episodic agent driven by the harness: begin_episode, then act/observe
// until done, then end_episode.
class Agent {
public:
    Agent(std::string name, const EnvSpec& spec, const AgentOptions& options);
    virtual ~Agent() = default;

    const std::string& name() const { return name_; }

    virtual void begin_episode(const Observation& initial);
    virtual ActionName act(const Observation& obs) = 0;
    virtual void observe(const Transition& t);
    // `truncated` marks a step-limit ending (environment or run budget).
    virtual void end_episode(bool truncated);

    const HistoryBuffer& history() const { return history_; }
    const EpisodeBuffer& episode() const { return episode_; }
    // Learned knowledge for logs (facts or lessons).
    virtual nlohmann::json knowledge() const { return nlohmann::json::array(); }

protected:
    std::string name_;
    EnvSpec spec_;
    AgentOptions options_;
    HistoryBuffer history_;
    EpisodeBuffer episode_;
    SplitMix64 rng_;
};

class RandomAgent final : public Agent {
public:
    RandomAgent(const EnvSpec& spec, const AgentOptions& options);
    ActionName act(const Observation& obs) override;
};

// ReAct with an optional memory: none (react), lessons (reflexion) or
// facts (react_fec).
class ReactAgent final : public Agent {
public:
    enum class Memory { None, Lessons, Facts };

    ReactAgent(Backend& backend, Memory memory, const EnvSpec& spec, const AgentOptions& options);

    ActionName act(const Observation& obs) override;
    void end_episode(bool truncated) override;
    nlohmann::json knowledge() const override;

    const FactMemory& facts() const { return facts_; }
    const LessonBuffer& lessons() const { return lessons_; }
    const std::string& last_thought() const { return last_thought_; }

private:
    Backend& backend_;
    Memory memory_;
    FactMemory facts_;
    LessonBuffer lessons_;
    std::string last_thought_;
};

// Fact-augmented lookahead planner agent.
class LwmAgent final : public Agent {
public:
    LwmAgent(Backend& backend, const EnvSpec& spec, const AgentOptions& options);

    void begin_episode(const Observation& initial) override;
    ActionName act(const Observation& obs) override;
    void observe(const Transition& t) override;
    void end_episode(bool truncated) override;
    nlohmann::json knowledge() const override { return facts_.to_vector(); }

    const FactMemory& facts() const { return facts_; }
    void set_facts(FactMemory facts) { facts_ = std::move(facts); }
    Planner& planner() { return planner_; }

private:
    Backend& backend_;
    FactMemory facts_;
    FactMemory snapshot_;
    Planner planner_;
};

// "random", "react", "reflexion", "react_fec", "lwm". `backend` may be null
// only for "random".
std::unique_ptr<Agent> make_agent(const std::string& name, Backend* backend, const EnvSpec& spec,
                                  const AgentOptions& options);
const std::vector<std::string>& agent_names();

}  // namespace lwm

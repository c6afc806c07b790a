#include "lwm/agents.hpp"

#include <algorithm>
#include <sstream>

#include "lwm/errors.hpp"
#include "lwm/log.hpp"
#include "lwm/prompts.hpp"

namespace lwm {

LessonBuffer::LessonBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InvalidArgument("lesson buffer capacity must be positive");
}

void LessonBuffer::push(std::string lesson) {
    items_.push_back(std::move(lesson));
    while (items_.size() > capacity_) items_.pop_front();
}

ActionName random_act(const std::vector<ActionName>& allowed, SplitMix64& rng) {
    if (allowed.empty()) throw InvalidArgument("no allowed actions to choose from");
    return allowed[rng.below(allowed.size())];
}

std::pair<std::string, ActionName> react_act(Backend& backend, const std::string& env_description,
                                             const Observation& obs, const HistoryBuffer& history,
                                             const std::vector<ActionName>& allowed, const std::string& context_block,
                                             SplitMix64& rng) {
    LlmCall call = prompts::react_step_call(env_description, context_block, obs, history, allowed);
    std::string thought;
    for (int attempt = 0; attempt < 2; ++attempt) {
        LlmResult r = complete(backend, call);
        thought = r.thought;
        ActionName action = r.action();
        if (std::find(allowed.begin(), allowed.end(), action) != allowed.end()) return {thought, action};
        warn("react chose illegal action '" + action + "'");
        call.user += "\n\nThe action \"" + action + "\" is not allowed. Choose exactly one of " +
                     prompts::format_actions(allowed) + ".";
    }
    warn("react gave no legal action after a re-prompt; acting randomly");
    return {thought, random_act(allowed, rng)};
}

LessonBuffer reflexion_reflect(Backend& backend, const std::string& env_description,
                               const TrajectorySummary& summary, LessonBuffer lessons) {
    LlmResult r;
    try {
        r = complete(backend, prompts::reflect_lesson_call(env_description, summary.text(), lessons.to_vector()));
    } catch (const MissingCassette&) {
        throw;
    } catch (const Error& e) {
        warn(std::string("reflection failed: ") + e.what());
        return lessons;
    }
    std::string lesson = canonicalize_fact(r.lesson());
    if (lesson.empty()) {
        warn("reflection returned an empty lesson");
        return lessons;
    }
    std::istringstream words(lesson);
    std::size_t count = 0;
    for (std::string w; words >> w;) ++count;
    if (count > 20) warn("lesson has " + std::to_string(count) + " words (expected at most 20)");
    lessons.push(std::move(lesson));
    return lessons;
}

// ---------------------------------------------------------------------------

Agent::Agent(std::string name, const EnvSpec& spec, const AgentOptions& options)
    : name_(std::move(name)), spec_(spec), options_(options), history_(options.history_capacity), rng_(options.seed) {
    if (spec_.allowed_actions.empty()) throw InvalidArgument("environment has no actions");
}

void Agent::begin_episode(const Observation& initial) {
    history_.clear();
    history_.push(HistoryKind::Obs, initial);
    episode_ = EpisodeBuffer{};
}

void Agent::observe(const Transition& t) {
    history_.push_pair(t.action, t.next_obs);
    episode_.add(t);
}

void Agent::end_episode(bool truncated) { episode_.set_truncated(truncated); }

RandomAgent::RandomAgent(const EnvSpec& spec, const AgentOptions& options) : Agent("random", spec, options) {}

ActionName RandomAgent::act(const Observation&) { return random_act(spec_.allowed_actions, rng_); }

namespace {

const char* react_name(ReactAgent::Memory m) {
    switch (m) {
        case ReactAgent::Memory::None: return "react";
        case ReactAgent::Memory::Lessons: return "reflexion";
        case ReactAgent::Memory::Facts: return "react_fec";
    }
    return "react";
}

}  // namespace

ReactAgent::ReactAgent(Backend& backend, Memory memory, const EnvSpec& spec, const AgentOptions& options)
    : Agent(react_name(memory), spec, options),
      backend_(backend),
      memory_(memory),
      facts_(options.fact_capacity),
      lessons_(options.lesson_capacity) {}

ActionName ReactAgent::act(const Observation& obs) {
    std::string context;
    if (memory_ == Memory::Facts) context = prompts::facts_context_block(facts_);
    if (memory_ == Memory::Lessons) context = prompts::lessons_context_block(lessons_.to_vector());
    auto [thought, action] =
        react_act(backend_, spec_.description, obs, history_, spec_.allowed_actions, context, rng_);
    last_thought_ = std::move(thought);
    return action;
}

void ReactAgent::end_episode(bool truncated) {
    Agent::end_episode(truncated);
    if (episode_.empty()) return;
    if (memory_ == Memory::Facts) {
        facts_ = learn_facts_and_update(backend_, episode_, facts_, spec_.description, options_.compress_facts,
                                        spec_.success_threshold);
    } else if (memory_ == Memory::Lessons) {
        lessons_ = reflexion_reflect(backend_, spec_.description,
                                     format_trajectory_summary(episode_, spec_.success_threshold), lessons_);
    }
}

nlohmann::json ReactAgent::knowledge() const {
    if (memory_ == Memory::Facts) return facts_.to_vector();
    if (memory_ == Memory::Lessons) return lessons_.to_vector();
    return nlohmann::json::array();
}

LwmAgent::LwmAgent(Backend& backend, const EnvSpec& spec, const AgentOptions& options)
    : Agent("lwm", spec, options),
      backend_(backend),
      facts_(options.fact_capacity),
      snapshot_(options.fact_capacity),
      planner_(backend, spec.description, spec.allowed_actions, options.plan, derive_seed(options.seed, 7)) {}

void LwmAgent::begin_episode(const Observation& initial) {
    Agent::begin_episode(initial);
    snapshot_ = facts_;
}

ActionName LwmAgent::act(const Observation& obs) { return planner_.plan(obs, history_, snapshot_); }

void LwmAgent::observe(const Transition& t) {
    Agent::observe(t);
    if (t.done) planner_.terminals().insert(t.next_obs);
}

void LwmAgent::end_episode(bool truncated) {
    Agent::end_episode(truncated);
    if (episode_.empty()) return;
    facts_ = learn_facts_and_update(backend_, episode_, facts_, spec_.description, options_.compress_facts,
                                    spec_.success_threshold);
}

const std::vector<std::string>& agent_names() {
    static const std::vector<std::string> names{"random", "react", "reflexion", "react_fec", "lwm"};
    return names;
}

std::unique_ptr<Agent> make_agent(const std::string& name, Backend* backend, const EnvSpec& spec,
                                  const AgentOptions& options) {
    if (name == "random") return std::make_unique<RandomAgent>(spec, options);
    if (!backend) throw InvalidArgument("agent '" + name + "' needs an LLM backend");
    if (name == "react") return std::make_unique<ReactAgent>(*backend, ReactAgent::Memory::None, spec, options);
    if (name == "reflexion") return std::make_unique<ReactAgent>(*backend, ReactAgent::Memory::Lessons, spec, options);
    if (name == "react_fec") return std::make_unique<ReactAgent>(*backend, ReactAgent::Memory::Facts, spec, options);
    if (name == "lwm") return std::make_unique<LwmAgent>(*backend, spec, options);
    throw InvalidArgument("unknown agent '" + name + "'");
}

}  // namespace lwm

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lwm/core_types.hpp"
#include "lwm/llm/backend.hpp"

namespace lwm {

inline constexpr double kDefaultSuccessThreshold = 0.99;

enum class Outcome { Success, Failure, Truncated };

// "SUCCESS", "FAILURE", "FAILURE (step limit)"
std::string_view outcome_label(Outcome outcome);
// Truncated episodes first, then the reward threshold.
Outcome classify_episode(const EpisodeBuffer& buf, double success_threshold = kDefaultSuccessThreshold);

struct TrajectorySummary {
    Outcome outcome = Outcome::Failure;
    double total_reward = 0.0;
    // "{i}. Obs: {obs} | Act: {act} | Reward: {r} | Next_Obs: {next}"
    std::vector<std::string> lines;

    // "Outcome: <label> (Total Reward: r)" followed by the lines.
    std::string text() const;
};

// Throws InvalidArgument on an empty buffer.
TrajectorySummary format_trajectory_summary(const EpisodeBuffer& buf,
                                            double success_threshold = kDefaultSuccessThreshold);

struct ParsedTrajectory {
    Outcome outcome = Outcome::Failure;
    double total_reward = 0.0;
    std::vector<Transition> transitions;
};
// Finds a rendered summary anywhere inside `text` (e.g. a whole prompt).
std::optional<ParsedTrajectory> parse_trajectory_summary(std::string_view text);

// Issues fact_extraction and drops anything already known or repeated.
std::vector<AtomicFact> extract_facts(Backend& backend, const std::string& env_description,
                                      const TrajectorySummary& summary, const FactMemory& known);

// Issues fact_redundancy_remover. The result never holds canonical duplicates.
// An empty answer for a non-empty input keeps the input (with a warning).
std::vector<AtomicFact> compress_facts(Backend& backend, const std::string& env_description,
                                       const std::vector<AtomicFact>& facts);

// Post-episode update: known facts plus new ones, optionally compressed,
// then trimmed to the memory capacity (newest kept).
FactMemory learn_facts_and_update(Backend& backend, const EpisodeBuffer& buf, const FactMemory& mem,
                                  const std::string& env_description, bool compress_enabled,
                                  double success_threshold = kDefaultSuccessThreshold);

}  // namespace lwm

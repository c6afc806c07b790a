#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lwm/core_types.hpp"
#include "lwm/llm/schema.hpp"

namespace lwm::prompts {

// Section headers shared by the templates. The oracle backend locates
// prompt fields by these.
inline constexpr std::string_view kFactsHeader =
    "Atomic facts that help to predict next state value / next reward accurately\n(at beginning of episode):\n";
inline constexpr std::string_view kKnownFactsHeader =
    "We already know and have the following facts (ensure you do not duplicate them)\n(at beginning of episode):\n";
inline constexpr std::string_view kCompressionFactsHeader = "Facts (at beginning of episode):\n";
inline constexpr std::string_view kObservationHeader = "Current Observation:\n";
inline constexpr std::string_view kValueObservationHeader =
    "Current Observation (to predict the current cumulative future reward for):\n";
inline constexpr std::string_view kHistoryHeader = "Recent history (old->new):\n";
inline constexpr std::string_view kActionHeader = "Given action to simulate the next observation and reward for:\n";
inline constexpr std::string_view kLessonsHeader = "Lessons from previous episodes (old->new):\n";
inline constexpr std::string_view kNone = "(none)";

// Raw template text by name. Throws InvalidArgument for unknown names.
const std::string& template_text(std::string_view name);

// Replaces every {{key}}. Throws InvalidArgument when the template uses a
// key that `vars` lacks.
std::string render(std::string_view name, const std::map<std::string, std::string>& vars);

// "- fact" per line, or "(none)".
std::string format_list(const std::vector<std::string>& items);
std::string format_facts(const FactMemory& facts);
// History lines joined by newlines, or "(none)".
std::string format_history(const HistoryBuffer& history);
// JSON array, e.g. ["up", "down"].
std::string format_actions(const std::vector<ActionName>& actions);

LlmCall propose_actions_call(const std::string& env_description, const FactMemory& facts, const Observation& obs,
                             const HistoryBuffer& history, const std::vector<ActionName>& allowed, int branch);
LlmCall simulate_step_call(const std::string& env_description, const FactMemory& facts, const Observation& obs,
                           const HistoryBuffer& history, const ActionName& action);
LlmCall estimate_value_call(const std::string& env_description, const FactMemory& facts, const Observation& obs,
                            const HistoryBuffer& history, double gamma);
LlmCall fact_extraction_call(const std::string& env_description, const std::string& trajectory_summary,
                             const FactMemory& known);
LlmCall fact_redundancy_remover_call(const std::string& env_description, const std::vector<std::string>& facts);
// `context_block` is empty for plain ReAct; otherwise a facts or lessons block.
LlmCall react_step_call(const std::string& env_description, const std::string& context_block, const Observation& obs,
                        const HistoryBuffer& history, const std::vector<ActionName>& allowed);
LlmCall reflect_lesson_call(const std::string& env_description, const std::string& trajectory_summary,
                            const std::vector<std::string>& lessons);

std::string facts_context_block(const FactMemory& facts);
std::string lessons_context_block(const std::vector<std::string>& lessons);

// --- reading rendered prompts back --------------------------------------

// Text between `header` and the next blank line. nullopt when absent.
std::optional<std::string> section(std::string_view prompt, std::string_view header);
// Inverse of format_list ("(none)" -> empty).
std::vector<std::string> parse_list(std::string_view block);
// Inverse of format_history.
std::vector<std::string> parse_history(std::string_view block);
std::optional<int> parse_branch(std::string_view prompt);
std::optional<double> parse_gamma(std::string_view prompt);
std::optional<std::vector<ActionName>> parse_allowed_actions(std::string_view prompt);

}  // namespace lwm::prompts

#include "lwm/prompts.hpp"

#include <regex>

#include "lwm/envs/environment.hpp"
#include "lwm/errors.hpp"

namespace lwm::prompts {

namespace detail {
const std::map<std::string, std::string>& template_table();
}

namespace {

constexpr const char* kExpertSystem = "You are an expert agent.";

LlmCall make_call(std::string system, std::string user, std::string_view function, double temperature) {
    LlmCall call;
    call.system = std::move(system);
    call.user = std::move(user);
    call.function = function_schema(function);
    call.temperature = temperature;
    return call;
}

std::string must_call(std::string_view function) { return "You must call " + std::string(function) + "."; }

}  // namespace

const std::string& template_text(std::string_view name) {
    const auto& table = detail::template_table();
    auto it = table.find(std::string(name));
    if (it == table.end()) throw InvalidArgument("unknown prompt template '" + std::string(name) + "'");
    return it->second;
}

std::string render(std::string_view name, const std::map<std::string, std::string>& vars) {
    const std::string& text = template_text(name);
    std::string out;
    out.reserve(text.size() * 2);
    std::size_t pos = 0;
    while (true) {
        auto open = text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text, pos);
            break;
        }
        auto close = text.find("}}", open + 2);
        if (close == std::string::npos) throw InvalidArgument("unterminated placeholder in template " + std::string(name));
        out.append(text, pos, open - pos);
        std::string key = text.substr(open + 2, close - open - 2);
        auto it = vars.find(key);
        if (it == vars.end()) {
            throw InvalidArgument("template " + std::string(name) + " needs value for '" + key + "'");
        }
        out += it->second;
        pos = close + 2;
    }
    // Templates end with a newline on disk; prompts do not.
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

std::string format_list(const std::vector<std::string>& items) {
    if (items.empty()) return std::string(kNone);
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += '\n';
        out += "- " + items[i];
    }
    return out;
}

std::string format_facts(const FactMemory& facts) { return format_list(facts.to_vector()); }

std::string format_history(const HistoryBuffer& history) {
    return history.empty() ? std::string(kNone) : history.joined();
}

std::string format_actions(const std::vector<ActionName>& actions) {
    std::string out = "[";
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i) out += ", ";
        out += nlohmann::json(actions[i]).dump();
    }
    return out + "]";
}

LlmCall propose_actions_call(const std::string& env_description, const FactMemory& facts, const Observation& obs,
                             const HistoryBuffer& history, const std::vector<ActionName>& allowed, int branch) {
    std::string user = render("propose_actions", {{"env_description", env_description},
                                                  {"current_facts_list", format_facts(facts)},
                                                  {"current_observation", obs},
                                                  {"history_lines", format_history(history)},
                                                  {"allowed_actions_list", format_actions(allowed)},
                                                  {"branch_factor", std::to_string(branch)}});
    return make_call(must_call("propose_actions"), std::move(user), "propose_actions", kPlannerTemperature);
}

LlmCall simulate_step_call(const std::string& env_description, const FactMemory& facts, const Observation& obs,
                           const HistoryBuffer& history, const ActionName& action) {
    std::string user = render("simulate_step", {{"env_description", env_description},
                                                {"current_facts_list", format_facts(facts)},
                                                {"current_observation", obs},
                                                {"history_lines", format_history(history)},
                                                {"action_to_simulate", action}});
    return make_call(must_call("simulate_step"), std::move(user), "simulate_step", kPlannerTemperature);
}

LlmCall estimate_value_call(const std::string& env_description, const FactMemory& facts, const Observation& obs,
                            const HistoryBuffer& history, double gamma) {
    std::string user = render("estimate_value", {{"env_description", env_description},
                                                 {"current_facts_list", format_facts(facts)},
                                                 {"observation_to_evaluate", obs},
                                                 {"history_lines", format_history(history)},
                                                 {"discount_gamma", format_number(gamma)}});
    return make_call(must_call("estimate_value"), std::move(user), "estimate_value", kPlannerTemperature);
}

LlmCall fact_extraction_call(const std::string& env_description, const std::string& trajectory_summary,
                             const FactMemory& known) {
    std::string user = render("fact_extraction", {{"env_description", env_description},
                                                  {"episode_trajectory_summary", trajectory_summary},
                                                  {"current_facts_list", format_facts(known)}});
    return make_call(kExpertSystem, std::move(user), "fact_extraction", kPlannerTemperature);
}

LlmCall fact_redundancy_remover_call(const std::string& env_description, const std::vector<std::string>& facts) {
    std::string user = render("fact_redundancy_remover", {{"env_description", env_description},
                                                          {"current_facts_list_for_compression", format_list(facts)}});
    return make_call(kExpertSystem, std::move(user), "fact_redundancy_remover", kPlannerTemperature);
}

LlmCall react_step_call(const std::string& env_description, const std::string& context_block, const Observation& obs,
                        const HistoryBuffer& history, const std::vector<ActionName>& allowed) {
    std::string user = render("react_step", {{"env_description", env_description},
                                             {"context_block", context_block},
                                             {"current_observation", obs},
                                             {"history_lines", format_history(history)},
                                             {"allowed_actions_list", format_actions(allowed)}});
    return make_call(must_call("react_step"), std::move(user), "react_step", kReactTemperature);
}

LlmCall reflect_lesson_call(const std::string& env_description, const std::string& trajectory_summary,
                            const std::vector<std::string>& lessons) {
    std::string user = render("reflect_lesson", {{"env_description", env_description},
                                                 {"episode_trajectory_summary", trajectory_summary},
                                                 {"lessons_list", format_list(lessons)}});
    return make_call(kExpertSystem, std::move(user), "reflect_lesson", kPlannerTemperature);
}

std::string facts_context_block(const FactMemory& facts) {
    return "\n" + std::string(kFactsHeader) + format_facts(facts) + "\n";
}

std::string lessons_context_block(const std::vector<std::string>& lessons) {
    return "\n" + std::string(kLessonsHeader) + format_list(lessons) + "\n";
}

std::optional<std::string> section(std::string_view prompt, std::string_view header) {
    auto at = prompt.find(header);
    if (at == std::string_view::npos) return std::nullopt;
    auto begin = at + header.size();
    auto end = prompt.find("\n\n", begin);
    if (end == std::string_view::npos) end = prompt.size();
    return std::string(prompt.substr(begin, end - begin));
}

std::vector<std::string> parse_list(std::string_view block) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= block.size()) {
        auto nl = block.find('\n', pos);
        std::string_view line = block.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (line.starts_with("- ")) {
            out.emplace_back(line.substr(2));
        } else if (!line.empty() && line != kNone) {
            out.emplace_back(line);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

std::vector<std::string> parse_history(std::string_view block) {
    std::vector<std::string> out;
    if (block == kNone) return out;
    std::size_t pos = 0;
    while (pos <= block.size()) {
        auto nl = block.find('\n', pos);
        std::string_view line = block.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (!line.empty()) out.emplace_back(line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

std::optional<int> parse_branch(std::string_view prompt) {
    static const std::regex re(R"(propose up to (\d+))");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(prompt.begin(), prompt.end(), m, re)) return std::nullopt;
    return std::stoi(m[1].str());
}

std::optional<double> parse_gamma(std::string_view prompt) {
    static const std::regex re(R"(discount factor is\s+([-+0-9.eE]+?)\.(\s|$))");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(prompt.begin(), prompt.end(), m, re)) return std::nullopt;
    try {
        return std::stod(m[1].str());
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<std::vector<ActionName>> parse_allowed_actions(std::string_view prompt) {
    for (std::string_view marker : {"each from\n", "each from ", "from\n", "from "}) {
        std::size_t at = 0;
        while ((at = prompt.find(marker, at)) != std::string_view::npos) {
            auto open = at + marker.size();
            at = open;
            if (open >= prompt.size() || prompt[open] != '[') continue;
            auto close = prompt.find(']', open);
            if (close == std::string_view::npos) continue;
            try {
                auto j = nlohmann::json::parse(prompt.substr(open, close - open + 1));
                return j.get<std::vector<ActionName>>();
            } catch (const nlohmann::json::exception&) {
                continue;
            }
        }
    }
    return std::nullopt;
}

}  // namespace lwm::prompts

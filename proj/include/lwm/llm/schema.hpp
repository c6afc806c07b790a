#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lwm {

enum class FieldType { String, Number, Boolean, StringList };

struct FieldSpec {
    std::string name;
    FieldType type = FieldType::String;
    std::string description;
};

// Structured function-call contract. Every schema starts with `thought`.
struct FunctionSchema {
    std::string name;
    std::string description;
    std::vector<FieldSpec> fields;

    // Throws ContractError unless `args` has exactly these keys with these types.
    void validate(const nlohmann::json& args) const;
    // OpenAI-style tool declaration.
    nlohmann::json to_tool() const;
};

// Known names: propose_actions, simulate_step, estimate_value,
// fact_extraction, fact_redundancy_remover, react_step, reflect_lesson.
const FunctionSchema& function_schema(std::string_view name);
bool is_known_function(std::string_view name);

struct LlmCall {
    std::string system;
    std::string user;
    FunctionSchema function;
    double temperature = 0.0;
    int max_tokens = 8512;
};

inline constexpr double kPlannerTemperature = 0.0;
inline constexpr double kReactTemperature = 0.3;

// Parsed tool-call arguments. `arguments` always includes `thought`.
struct LlmResult {
    std::string thought;
    nlohmann::json arguments = nlohmann::json::object();

    // Validates against the schema and splits out the thought.
    static LlmResult from_arguments(const FunctionSchema& schema, const nlohmann::json& args);

    std::vector<std::string> actions() const { return string_list("actions"); }
    std::string next_observation() const { return arguments.at("next_observation").get<std::string>(); }
    double reward() const { return arguments.at("reward").get<double>(); }
    bool done() const { return arguments.at("done").get<bool>(); }
    double value() const { return arguments.at("value").get<double>(); }
    std::vector<std::string> new_facts() const { return string_list("new_facts"); }
    std::vector<std::string> all_facts() const { return string_list("all_facts"); }
    std::string action() const { return arguments.at("action").get<std::string>(); }
    std::string lesson() const { return arguments.at("lesson").get<std::string>(); }

    friend bool operator==(const LlmResult& a, const LlmResult& b) {
        return a.thought == b.thought && a.arguments == b.arguments;
    }

private:
    std::vector<std::string> string_list(const char* key) const {
        return arguments.at(key).get<std::vector<std::string>>();
    }
};

void to_json(nlohmann::json& j, const LlmResult& r);
void from_json(const nlohmann::json& j, LlmResult& r);

}  // namespace lwm

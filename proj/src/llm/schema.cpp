#include "lwm/llm/schema.hpp"

#include <map>

#include "lwm/errors.hpp"

namespace lwm {

namespace {

const char* type_name(FieldType t) {
    switch (t) {
        case FieldType::String: return "string";
        case FieldType::Number: return "number";
        case FieldType::Boolean: return "boolean";
        case FieldType::StringList: return "array";
    }
    return "string";
}

bool type_matches(FieldType t, const nlohmann::json& v) {
    switch (t) {
        case FieldType::String: return v.is_string();
        case FieldType::Number: return v.is_number();
        case FieldType::Boolean: return v.is_boolean();
        case FieldType::StringList:
            if (!v.is_array()) return false;
            for (const auto& item : v) {
                if (!item.is_string()) return false;
            }
            return true;
    }
    return false;
}

FunctionSchema make(std::string name, std::string description, std::vector<FieldSpec> extra,
                    std::string thought_desc) {
    FunctionSchema s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.fields.push_back({"thought", FieldType::String, std::move(thought_desc)});
    for (auto& f : extra) s.fields.push_back(std::move(f));
    return s;
}

const std::map<std::string, FunctionSchema, std::less<>>& registry() {
    static const std::map<std::string, FunctionSchema, std::less<>> table = [] {
        std::map<std::string, FunctionSchema, std::less<>> m;
        auto add = [&](FunctionSchema s) { m.emplace(s.name, std::move(s)); };
        add(make("fact_extraction", "Extract new atomic facts from an episode trajectory.",
                 {{"new_facts", FieldType::StringList,
                   "The list of newly extracted atomic facts. If no new critical facts are found, provide an empty list."}},
                 "Your reasoning process for identifying these new facts."));
        add(make("fact_redundancy_remover", "Remove redundant facts from the fact memory.",
                 {{"all_facts", FieldType::StringList, "The refined, concise list of essential atomic facts."}},
                 "Your reasoning for the compression and refinement decisions."));
        add(make("propose_actions", "Propose the next best actions to try.",
                 {{"actions", FieldType::StringList, "The proposed actions."}},
                 "Your reasoning for selecting these actions."));
        add(make("simulate_step", "Predict the outcome of one action.",
                 {{"next_observation", FieldType::String, "The predicted (perhaps latent) observation after the action."},
                  {"reward", FieldType::Number, "The predicted immediate reward (float) after the action."},
                  {"done", FieldType::Boolean,
                   "True if the resulting state ends the episode (terminal), false otherwise."}},
                 "Your reasoning for the predicted outcome."));
        add(make("estimate_value", "Estimate the value of an observation.",
                 {{"value", FieldType::Number,
                   "The estimated state value (float). The cumulative future reward from the current (perhaps latent) "
                   "observation."}},
                 "Your reasoning for this value estimate."));
        add(make("react_step", "Reason about the situation and pick one action.",
                 {{"action", FieldType::String, "The single action to take next, from the allowed actions."}},
                 "Your reasoning about what to do next."));
        add(make("reflect_lesson", "Write one lesson learned from the episode.",
                 {{"lesson", FieldType::String, "One concise, actionable lesson of at most 20 words."}},
                 "Your analysis of what went well or badly in the episode."));
        return m;
    }();
    return table;
}

}  // namespace

void FunctionSchema::validate(const nlohmann::json& args) const {
    if (!args.is_object()) throw ContractError(name + ": arguments must be a JSON object");
    for (const auto& f : fields) {
        auto it = args.find(f.name);
        if (it == args.end()) throw ContractError(name + ": missing field '" + f.name + "'");
        if (!type_matches(f.type, *it)) {
            throw ContractError(name + ": field '" + f.name + "' must be of type " + type_name(f.type));
        }
    }
    for (const auto& [key, _] : args.items()) {
        bool known = false;
        for (const auto& f : fields) known = known || f.name == key;
        if (!known) throw ContractError(name + ": unexpected field '" + key + "'");
    }
}

nlohmann::json FunctionSchema::to_tool() const {
    nlohmann::json props = nlohmann::json::object();
    nlohmann::json required = nlohmann::json::array();
    for (const auto& f : fields) {
        nlohmann::json p{{"type", type_name(f.type)}, {"description", f.description}};
        if (f.type == FieldType::StringList) p["items"] = {{"type", "string"}};
        props[f.name] = std::move(p);
        required.push_back(f.name);
    }
    return {{"type", "function"},
            {"function",
             {{"name", name},
              {"description", description},
              {"parameters",
               {{"type", "object"}, {"properties", props}, {"required", required}, {"additionalProperties", false}}}}}};
}

const FunctionSchema& function_schema(std::string_view name) {
    const auto& table = registry();
    auto it = table.find(name);
    if (it == table.end()) throw ContractError("unknown function schema '" + std::string(name) + "'");
    return it->second;
}

bool is_known_function(std::string_view name) { return registry().contains(name); }

LlmResult LlmResult::from_arguments(const FunctionSchema& schema, const nlohmann::json& args) {
    schema.validate(args);
    LlmResult r;
    r.thought = args.at("thought").get<std::string>();
    r.arguments = args;
    return r;
}

void to_json(nlohmann::json& j, const LlmResult& r) {
    j = r.arguments;
    j["thought"] = r.thought;
}

void from_json(const nlohmann::json& j, LlmResult& r) {
    r.thought = j.at("thought").get<std::string>();
    r.arguments = j;
}

}  // namespace lwm

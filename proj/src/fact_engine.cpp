#include "lwm/fact_engine.hpp"

#include <regex>
#include <set>
#include <sstream>

#include "lwm/errors.hpp"
#include "lwm/log.hpp"
#include "lwm/prompts.hpp"

namespace lwm {

std::string_view outcome_label(Outcome outcome) {
    switch (outcome) {
        case Outcome::Success: return "SUCCESS";
        case Outcome::Failure: return "FAILURE";
        case Outcome::Truncated: return "FAILURE (step limit)";
    }
    return "FAILURE";
}

Outcome classify_episode(const EpisodeBuffer& buf, double success_threshold) {
    if (buf.truncated()) return Outcome::Truncated;
    if (buf.total_reward() >= success_threshold) return Outcome::Success;
    return Outcome::Failure;
}

std::string TrajectorySummary::text() const {
    std::string out = "Outcome: " + std::string(outcome_label(outcome)) + " (Total Reward: " +
                      format_reward(total_reward) + ")";
    for (const auto& line : lines) out += "\n" + line;
    return out;
}

TrajectorySummary format_trajectory_summary(const EpisodeBuffer& buf, double success_threshold) {
    if (buf.empty()) throw InvalidArgument("cannot summarize an empty episode");
    TrajectorySummary s;
    s.outcome = classify_episode(buf, success_threshold);
    s.total_reward = buf.total_reward();
    std::size_t i = 1;
    for (const auto& t : buf.transitions()) {
        s.lines.push_back(std::to_string(i++) + ". Obs: " + t.obs + " | Act: " + t.action +
                          " | Reward: " + format_reward(t.reward) + " | Next_Obs: " + t.next_obs);
    }
    return s;
}

std::optional<ParsedTrajectory> parse_trajectory_summary(std::string_view text) {
    static const std::regex header(R"(^Outcome: (SUCCESS|FAILURE \(step limit\)|FAILURE) \(Total Reward: ([^)]+)\)$)");
    static const std::regex step(R"(^(\d+)\. Obs: (.*) \| Act: (.*) \| Reward: (\S+) \| Next_Obs: (.*)$)");
    std::istringstream in{std::string(text)};
    std::string line;
    std::optional<ParsedTrajectory> out;
    std::smatch m;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!out) {
            if (std::regex_match(line, m, header)) {
                out.emplace();
                const std::string label = m[1].str();
                out->outcome = label == "SUCCESS"   ? Outcome::Success
                               : label == "FAILURE" ? Outcome::Failure
                                                    : Outcome::Truncated;
                out->total_reward = std::stod(m[2].str());
            }
            continue;
        }
        if (!std::regex_match(line, m, step)) break;
        Transition t;
        t.obs = m[2].str();
        t.action = m[3].str();
        t.reward = std::stod(m[4].str());
        t.next_obs = m[5].str();
        out->transitions.push_back(std::move(t));
    }
    if (out && !out->transitions.empty()) out->transitions.back().done = out->outcome != Outcome::Truncated;
    return out;
}

std::vector<AtomicFact> extract_facts(Backend& backend, const std::string& env_description,
                                      const TrajectorySummary& summary, const FactMemory& known) {
    LlmCall call = prompts::fact_extraction_call(env_description, summary.text(), known);
    LlmResult result = complete(backend, call);
    std::vector<AtomicFact> fresh;
    std::set<std::string> seen;
    for (const auto& f : result.new_facts()) {
        std::string canon = canonicalize_fact(f);
        if (canon.empty() || known.contains(canon) || !seen.insert(canon).second) continue;
        fresh.push_back(std::move(canon));
    }
    return fresh;
}

std::vector<AtomicFact> compress_facts(Backend& backend, const std::string& env_description,
                                       const std::vector<AtomicFact>& facts) {
    LlmCall call = prompts::fact_redundancy_remover_call(env_description, facts);
    LlmResult result = complete(backend, call);
    std::vector<AtomicFact> out;
    std::set<std::string> seen;
    for (const auto& f : result.all_facts()) {
        std::string canon = canonicalize_fact(f);
        if (canon.empty() || !seen.insert(canon).second) continue;
        out.push_back(std::move(canon));
    }
    if (out.empty() && !facts.empty()) {
        warn("fact compression returned nothing for " + std::to_string(facts.size()) + " facts; keeping input");
        std::set<std::string> again;
        for (const auto& f : facts) {
            std::string canon = canonicalize_fact(f);
            if (!canon.empty() && again.insert(canon).second) out.push_back(std::move(canon));
        }
    }
    return out;
}

FactMemory learn_facts_and_update(Backend& backend, const EpisodeBuffer& buf, const FactMemory& mem,
                                  const std::string& env_description, bool compress_enabled,
                                  double success_threshold) {
    if (buf.empty()) return mem;
    TrajectorySummary summary = format_trajectory_summary(buf, success_threshold);
    std::vector<AtomicFact> fresh = extract_facts(backend, env_description, summary, mem);

    std::vector<AtomicFact> candidate = mem.to_vector();
    candidate.insert(candidate.end(), fresh.begin(), fresh.end());
    if (compress_enabled) candidate = compress_facts(backend, env_description, candidate);

    FactMemory updated(mem.capacity());
    updated.assign(candidate);
    return updated;
}

}  // namespace lwm

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lwm/agents.hpp"
#include "lwm/envs/environment.hpp"
#include "lwm/llm/backend.hpp"
#include "lwm/llm/oracle.hpp"

namespace lwm {

inline constexpr int kLogSchema = 1;

struct RunRecord {
    std::string agent;
    std::string env;
    std::uint64_t seed = 0;
    int step_budget = 300;
    double success_threshold = kDefaultSuccessThreshold;
    std::vector<EpisodeBuffer> episodes;
    double cumulative_return = 0.0;
    int total_steps = 0;
    std::optional<double> steps_per_success;
    // Set when the run stopped on an error.
    std::optional<std::string> error;
};

// Mean and Student-t 95% half-width. The half-width is absent for n = 1.
struct Interval {
    double mean = 0.0;
    std::optional<double> half_width;
};
Interval ci95(const std::vector<double>& samples);

// 100 * (raw - random) / (expert - random); throws UndefinedNormalization
// when expert == random.
double normalized_score(double raw, double random_score, double expert_score);

// Mean length of successful episodes; absent without successes.
std::optional<double> steps_per_success(const RunRecord& record, double success_threshold);
std::optional<double> steps_per_success(const RunRecord& record);

// JSON-lines writer for one run: a "transition" line per step and an
// "episode" line per finished episode. No timestamps, so identical runs
// produce identical bytes.
class RunLog {
public:
    RunLog(std::ostream& out, std::string agent, std::string env, std::uint64_t seed);
    void transition(int episode, int step, const Transition& t, bool truncated);
    void episode(int episode, const EpisodeBuffer& buf, Outcome outcome, const nlohmann::json& knowledge);

private:
    std::ostream& out_;
    std::string agent_;
    std::string env_;
    std::uint64_t seed_;
};

// Plays episodes until `step_budget` environment steps are used. An
// episode cut by the budget is truncated and still reflected on.
RunRecord run_budget(Agent& agent, Environment& env, std::uint64_t seed, int step_budget, RunLog* log = nullptr);

nlohmann::json summary_json(const RunRecord& record);

// Everything `lwm run` needs.
struct RunConfig {
    std::string env = "frozenlake";
    int size = 0;  // 0: 4 for frozenlake, 5 for crafter
    double hole_density = 0.9;
    std::string fixture;
    std::string agent = "lwm";
    std::uint64_t seed = 0;
    int steps = 300;
    int depth = 3;
    int branch = 4;
    double gamma = 0.99;
    double step_penalty = 0.01;
    bool parallel = false;
    std::string backend = "oracle";  // http | oracle | oracle-facts | replay
    std::string cassette;           // replay source
    std::string record;             // cassette to append to
    bool compress = true;
    std::vector<std::string> proposal_order;
    std::size_t history_capacity = HistoryBuffer::kDefaultCapacity;
    std::size_t fact_capacity = FactMemory::kDefaultCapacity;
    std::size_t lesson_capacity = LessonBuffer::kDefaultCapacity;
    std::string out;  // output directory; empty: no files
    bool trace = false;
};

std::unique_ptr<Environment> make_environment(const RunConfig& config);
std::shared_ptr<EnvModel> make_env_model(Environment& env);

// Runs one (agent, env, seed) configuration end to end and, when
// `config.out` is set, writes <stem>.jsonl, <stem>.summary.json and
// optionally <stem>.trace.jsonl.
RunRecord run_experiment(const RunConfig& config);
std::string run_stem(const RunConfig& config);

// Runs each seed on a pool of `jobs` threads; results in seed order.
std::vector<RunRecord> run_seeds(const RunConfig& config, const std::vector<std::uint64_t>& seeds, int jobs);

struct MetricRow {
    std::string agent;
    std::string env;
    std::string metric;
    std::optional<double> mean;
    std::optional<double> ci95;
    std::size_t n = 0;
};

// Aggregates run summaries per (agent, env): cumulative_return,
// steps_per_success (per-seed means, CI across seeds) and normalized_score
// (random agent = 0, best agent or `expert` = 100).
std::vector<MetricRow> aggregate(const std::vector<nlohmann::json>& summaries,
                                 const std::map<std::string, double>& expert_by_env = {});
std::vector<nlohmann::json> load_summaries(const std::filesystem::path& dir);
void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows);

}  // namespace lwm

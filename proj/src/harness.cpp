#include "lwm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "lwm/envs/crafter.hpp"
#include "lwm/envs/frozen_lake.hpp"
#include "lwm/errors.hpp"
#include "lwm/llm/cassette.hpp"
#include "lwm/llm/http_backend.hpp"
#include "lwm/log.hpp"

namespace lwm {

Interval ci95(const std::vector<double>& samples) {
    if (samples.empty()) throw InvalidArgument("ci95 needs at least one sample");
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double x : samples) sum += x;
    Interval out;
    out.mean = sum / n;
    if (samples.size() == 1) return out;
    double ss = 0.0;
    for (double x : samples) ss += (x - out.mean) * (x - out.mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    boost::math::students_t dist(n - 1.0);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    out.half_width = t * sd / std::sqrt(n);
    return out;
}

double normalized_score(double raw, double random_score, double expert_score) {
    const double denom = expert_score - random_score;
    if (denom == 0.0 || !std::isfinite(denom)) {
        throw UndefinedNormalization("expert and random scores coincide; normalization is undefined");
    }
    return 100.0 * (raw - random_score) / denom;
}

std::optional<double> steps_per_success(const RunRecord& record, double success_threshold) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& ep : record.episodes) {
        if (ep.empty() || classify_episode(ep, success_threshold) != Outcome::Success) continue;
        total += static_cast<double>(ep.size());
        ++count;
    }
    if (count == 0) return std::nullopt;
    return total / static_cast<double>(count);
}

std::optional<double> steps_per_success(const RunRecord& record) {
    return steps_per_success(record, record.success_threshold);
}

// ---------------------------------------------------------------------------

RunLog::RunLog(std::ostream& out, std::string agent, std::string env, std::uint64_t seed)
    : out_(out), agent_(std::move(agent)), env_(std::move(env)), seed_(seed) {}

void RunLog::transition(int episode, int step, const Transition& t, bool truncated) {
    nlohmann::json j{{"schema", kLogSchema},
                     {"type", "transition"},
                     {"agent", agent_},
                     {"env", env_},
                     {"seed", seed_},
                     {"episode", episode},
                     {"step", step}};
    j.update(nlohmann::json(t));
    j["truncated"] = truncated;
    out_ << j.dump() << '\n';
}

void RunLog::episode(int episode, const EpisodeBuffer& buf, Outcome outcome, const nlohmann::json& knowledge) {
    nlohmann::json j{{"schema", kLogSchema},
                     {"type", "episode"},
                     {"agent", agent_},
                     {"env", env_},
                     {"seed", seed_},
                     {"episode", episode},
                     {"steps", buf.size()},
                     {"total_reward", buf.total_reward()},
                     {"truncated", buf.truncated()},
                     {"outcome", outcome_label(outcome)},
                     {"knowledge", knowledge}};
    out_ << j.dump() << '\n';
    out_.flush();
}

RunRecord run_budget(Agent& agent, Environment& env, std::uint64_t seed, int step_budget, RunLog* log) {
    if (step_budget < 1) throw InvalidArgument("step budget must be >= 1");
    RunRecord record;
    record.agent = agent.name();
    record.env = env.spec().name;
    record.seed = seed;
    record.step_budget = step_budget;
    record.success_threshold = env.spec().success_threshold;

    int steps = 0;
    int episode_index = 0;
    try {
        while (steps < step_budget) {
            Observation obs = env.reset();
            agent.begin_episode(obs);
            EpisodeBuffer buf;
            bool truncated = false;
            while (true) {
                ActionName action = agent.act(obs);
                StepResult r = env.step(action);
                ++steps;
                Transition t{obs, action, r.reward, r.obs, r.done && !r.truncated};
                const bool budget_cut = !r.done && steps >= step_budget;
                truncated = r.truncated || budget_cut;
                agent.observe(t);
                buf.add(t);
                if (log) log->transition(episode_index, static_cast<int>(buf.size()) - 1, t, truncated);
                obs = r.obs;
                if (r.done || budget_cut) break;
            }
            buf.set_truncated(truncated);
            agent.end_episode(truncated);
            if (log) log->episode(episode_index, buf, classify_episode(buf, record.success_threshold), agent.knowledge());
            record.cumulative_return += buf.total_reward();
            record.episodes.push_back(std::move(buf));
            ++episode_index;
        }
    } catch (const std::exception& e) {
        record.error = e.what();
        warn("run " + record.agent + "/" + record.env + " seed " + std::to_string(seed) + " aborted: " + e.what());
    }
    record.total_steps = steps;
    record.steps_per_success = steps_per_success(record);
    return record;
}

nlohmann::json summary_json(const RunRecord& record) {
    std::size_t successes = 0;
    for (const auto& ep : record.episodes) {
        successes += !ep.empty() && classify_episode(ep, record.success_threshold) == Outcome::Success;
    }
    nlohmann::json j{{"schema", kLogSchema},
                     {"agent", record.agent},
                     {"env", record.env},
                     {"seed", record.seed},
                     {"step_budget", record.step_budget},
                     {"total_steps", record.total_steps},
                     {"episodes", record.episodes.size()},
                     {"successes", successes},
                     {"cumulative_return", record.cumulative_return}};
    j["steps_per_success"] = record.steps_per_success ? nlohmann::json(*record.steps_per_success) : nlohmann::json();
    j["error"] = record.error ? nlohmann::json(*record.error) : nlohmann::json();
    return j;
}

// ---------------------------------------------------------------------------

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::unique_ptr<Environment> make_environment(const RunConfig& config) {
    if (config.env == "frozenlake") {
        if (!config.fixture.empty()) return std::make_unique<FrozenLakeEnv>(FrozenLakeBoard::parse(read_file(config.fixture)));
        const int n = config.size > 0 ? config.size : 4;
        return std::make_unique<FrozenLakeEnv>(gen_frozen_lake(n, config.hole_density, config.seed));
    }
    if (config.env == "crafter") {
        if (!config.fixture.empty()) return std::make_unique<CrafterEnv>(CrafterWorld::parse(read_file(config.fixture)));
        const int n = config.size > 0 ? config.size : 5;
        return std::make_unique<CrafterEnv>(gen_crafter(n, config.seed));
    }
    throw InvalidArgument("unknown environment '" + config.env + "'");
}

std::shared_ptr<EnvModel> make_env_model(Environment& env) {
    if (auto* lake = dynamic_cast<FrozenLakeEnv*>(&env)) return std::make_shared<FrozenLakeModel>(lake->board());
    if (auto* crafter = dynamic_cast<CrafterEnv*>(&env)) {
        return std::make_shared<CrafterModel>(crafter->world(), crafter);
    }
    throw InvalidArgument("no oracle model for environment '" + env.spec().name + "'");
}

std::string run_stem(const RunConfig& config) {
    return config.agent + "_" + config.env + "_seed" + std::to_string(config.seed);
}

RunRecord run_experiment(const RunConfig& config) {
    std::unique_ptr<Environment> env = make_environment(config);

    std::unique_ptr<Backend> base;
    if (config.agent != "random") {
        if (config.backend == "oracle" || config.backend == "oracle-facts") {
            OracleConfig oc;
            oc.visibility = config.backend == "oracle" ? Visibility::Full : Visibility::FactsOnly;
            oc.proposal_order = config.proposal_order;
            oc.step_penalty = config.step_penalty;
            oc.gamma = config.gamma;
            base = std::make_unique<OracleBackend>(make_env_model(*env), oc);
        } else if (config.backend == "http") {
            base = std::make_unique<HttpBackend>(HttpBackendConfig::from_env());
        } else if (config.backend == "replay") {
            if (config.cassette.empty()) throw InvalidArgument("replay backend needs a cassette file");
            base = std::make_unique<ReplayBackend>(config.cassette);
        } else {
            throw InvalidArgument("unknown backend '" + config.backend + "'");
        }
    }
    std::unique_ptr<Backend> recorder;
    Backend* backend = base.get();
    if (base && !config.record.empty()) {
        recorder = std::make_unique<RecordingBackend>(*base, config.record);
        backend = recorder.get();
    }

    AgentOptions options;
    options.history_capacity = config.history_capacity;
    options.fact_capacity = config.fact_capacity;
    options.lesson_capacity = config.lesson_capacity;
    options.compress_facts = config.compress;
    options.plan = PlanConfig{config.depth, config.branch, config.gamma, config.step_penalty, config.parallel};
    options.seed = derive_seed(config.seed, 1);
    std::unique_ptr<Agent> agent = make_agent(config.agent, backend, env->spec(), options);

    std::ofstream log_file;
    std::ofstream trace_file;
    std::unique_ptr<RunLog> log;
    if (!config.out.empty()) {
        std::filesystem::create_directories(config.out);
        const auto stem = std::filesystem::path(config.out) / run_stem(config);
        log_file.open(stem.string() + ".jsonl", std::ios::trunc);
        if (!log_file) throw InvalidArgument("cannot write " + stem.string() + ".jsonl");
        log = std::make_unique<RunLog>(log_file, config.agent, env->spec().name, config.seed);
        if (config.trace) {
            if (auto* lwm = dynamic_cast<LwmAgent*>(agent.get())) {
                trace_file.open(stem.string() + ".trace.jsonl", std::ios::trunc);
                lwm->planner().set_trace([&trace_file](const nlohmann::json& j) { trace_file << j.dump() << '\n'; });
            }
        }
    }

    RunRecord record = run_budget(*agent, *env, config.seed, config.steps, log.get());

    if (!config.out.empty()) {
        const auto stem = std::filesystem::path(config.out) / run_stem(config);
        std::ofstream summary(stem.string() + ".summary.json", std::ios::trunc);
        summary << summary_json(record).dump(2) << '\n';
    }
    return record;
}

std::vector<RunRecord> run_seeds(const RunConfig& config, const std::vector<std::uint64_t>& seeds, int jobs) {
    std::vector<RunRecord> out(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            RunConfig c = config;
            c.seed = seeds[i];
            try {
                out[i] = run_experiment(c);
            } catch (const std::exception& e) {
                out[i].agent = c.agent;
                out[i].env = c.env;
                out[i].seed = c.seed;
                out[i].error = e.what();
                warn("seed " + std::to_string(c.seed) + " failed: " + e.what());
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

// ---------------------------------------------------------------------------

std::vector<nlohmann::json> load_summaries(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InvalidArgument("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.ends_with(".summary.json")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<nlohmann::json> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        try {
            out.push_back(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(f.string() + ": " + e.what());
        }
    }
    return out;
}

std::vector<MetricRow> aggregate(const std::vector<nlohmann::json>& summaries,
                                 const std::map<std::string, double>& expert_by_env) {
    struct Group {
        std::vector<double> returns;
        std::vector<double> sps;
    };
    std::map<std::pair<std::string, std::string>, Group> groups;  // (env, agent)
    for (const auto& s : summaries) {
        if (!s.value("error", nlohmann::json()).is_null()) {
            warn("skipping failed run " + s.value("agent", std::string("?")) + " seed " +
                 std::to_string(s.value("seed", 0)));
            continue;
        }
        auto& g = groups[{s.at("env").get<std::string>(), s.at("agent").get<std::string>()}];
        g.returns.push_back(s.at("cumulative_return").get<double>());
        const auto& sps = s.at("steps_per_success");
        if (!sps.is_null()) g.sps.push_back(sps.get<double>());
    }

    std::vector<MetricRow> rows;
    std::map<std::string, std::map<std::string, Interval>> return_by_env;
    for (const auto& [key, g] : groups) {
        const auto& [env, agent] = key;
        Interval r = ci95(g.returns);
        return_by_env[env][agent] = r;
        rows.push_back({agent, env, "cumulative_return", r.mean, r.half_width, g.returns.size()});
        if (g.sps.empty()) {
            rows.push_back({agent, env, "steps_per_success", std::nullopt, std::nullopt, 0});
        } else {
            Interval s = ci95(g.sps);
            rows.push_back({agent, env, "steps_per_success", s.mean, s.half_width, g.sps.size()});
        }
    }

    for (const auto& [env, agents] : return_by_env) {
        auto random = agents.find("random");
        if (random == agents.end()) {
            warn("no random baseline for " + env + "; normalized scores skipped");
            continue;
        }
        double expert;
        if (auto it = expert_by_env.find(env); it != expert_by_env.end()) {
            expert = it->second;
        } else {
            expert = -std::numeric_limits<double>::infinity();
            for (const auto& [_, iv] : agents) expert = std::max(expert, iv.mean);
        }
        for (const auto& [agent, iv] : agents) {
            MetricRow row{agent, env, "normalized_score", std::nullopt, std::nullopt,
                          groups[{env, agent}].returns.size()};
            try {
                row.mean = normalized_score(iv.mean, random->second.mean, expert);
                if (iv.half_width) row.ci95 = 100.0 * *iv.half_width / std::abs(expert - random->second.mean);
            } catch (const UndefinedNormalization& e) {
                warn(e.what());
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    auto num = [](const std::optional<double>& v) {
        if (!v) return std::string("--");
        std::ostringstream s;
        s.setf(std::ios::fixed);
        s.precision(4);
        s << *v;
        return s.str();
    };
    out << "agent,env,metric,mean,ci95,n\n";
    for (const auto& r : rows) {
        out << r.agent << ',' << r.env << ',' << r.metric << ',' << num(r.mean) << ',' << num(r.ci95) << ',' << r.n
            << '\n';
    }
}

}  // namespace lwm

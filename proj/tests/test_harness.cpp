#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lwm/errors.hpp"
#include "lwm/harness.hpp"
#include "support.hpp"

using namespace lwm;
using lwm::testing::data_path;
using lwm::testing::temp_dir;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EpisodeBuffer episode_of(int steps, double final_reward, bool truncated = false) {
    EpisodeBuffer b;
    for (int i = 0; i < steps; ++i) {
        const bool last = i + 1 == steps;
        b.add({"o", "a", last ? final_reward : 0.0, "o", last && !truncated});
    }
    b.set_truncated(truncated);
    return b;
}

RunConfig fixture_config() {
    RunConfig c;
    c.fixture = data_path("fixtures/case_study_lake.txt").string();
    c.agent = "lwm";
    c.backend = "oracle";
    c.proposal_order = {"right", "down", "left", "up"};
    return c;
}

}  // namespace

TEST_CASE("ci95") {
    auto a = ci95({1, 2, 3});
    CHECK(a.mean == doctest::Approx(2.0));
    REQUIRE(a.half_width);
    // t(0.975, 2) = 4.302653 from tables; s = 1
    CHECK(*a.half_width == doctest::Approx(4.302653 / std::sqrt(3.0)).epsilon(1e-6));
    CHECK(std::abs(*a.half_width - 2.484) < 1e-3);

    auto b = ci95({5, 5, 5});
    CHECK(b.mean == doctest::Approx(5.0));
    REQUIRE(b.half_width);
    CHECK(*b.half_width == doctest::Approx(0.0));

    auto c = ci95({7.5});
    CHECK(c.mean == doctest::Approx(7.5));
    CHECK_FALSE(c.half_width);

    CHECK_THROWS_AS(ci95({}), InvalidArgument);

    // t(0.975, 9) = 2.262157
    std::vector<double> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    auto d = ci95(ten);
    CHECK(*d.half_width == doctest::Approx(2.262157 * std::sqrt(110.0 / 12.0) / std::sqrt(10.0)).epsilon(1e-6));
}

TEST_CASE("normalized_score reproduces the published table") {
    CHECK(std::abs(normalized_score(20.20, -80.00, 31.80) - 89.62) < 0.01);
    CHECK(std::abs(normalized_score(-265.20, -80.00, 31.80) - -165.65) < 0.01);
    CHECK(std::abs(normalized_score(-61.10, -80.00, 31.80) - 16.91) < 0.01);
    CHECK(normalized_score(-80.0, -80.0, 31.8) == 0.0);
    CHECK(normalized_score(31.8, -80.0, 31.8) == doctest::Approx(100.0));
    CHECK_THROWS_AS(normalized_score(1.0, 2.0, 2.0), UndefinedNormalization);
}

TEST_CASE("steps_per_success") {
    RunRecord r;
    r.episodes = {episode_of(4, 1.0), episode_of(3, -1.0), episode_of(8, 1.0), episode_of(5, 0.0, true)};
    auto s = steps_per_success(r, 0.99);
    REQUIRE(s);
    CHECK(*s == doctest::Approx(6.0));

    RunRecord none;
    none.episodes = {episode_of(3, -1.0), episode_of(10, 0.0, true)};
    CHECK_FALSE(steps_per_success(none, 0.99));
    CHECK_FALSE(steps_per_success(RunRecord{}, 0.99));
}

TEST_CASE("budget of one step") {
    FrozenLakeEnv env(case_study_board());
    RandomAgent agent(env.spec(), AgentOptions{});
    std::ostringstream out;
    RunLog log(out, "random", "frozenlake", 0);
    RunRecord r = run_budget(agent, env, 0, 1, &log);
    CHECK(r.total_steps == 1);
    REQUIRE(r.episodes.size() == 1);
    CHECK(r.episodes[0].size() == 1);
    int transitions = 0;
    std::istringstream in(out.str());
    for (std::string line; std::getline(in, line);) {
        auto j = nlohmann::json::parse(line);
        CHECK(j["schema"] == kLogSchema);
        if (j["type"] == "transition") ++transitions;
    }
    CHECK(transitions == 1);
}

TEST_CASE("budget is never exceeded") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        FrozenLakeEnv env(gen_frozen_lake(4, 0.9, seed));
        AgentOptions opts;
        opts.seed = seed;
        RandomAgent agent(env.spec(), opts);
        for (int budget : {1, 7, 50, 123}) {
            RunRecord r = run_budget(agent, env, seed, budget);
            int sum = 0;
            for (const auto& e : r.episodes) sum += static_cast<int>(e.size());
            CHECK(sum == r.total_steps);
            CHECK(sum <= budget);
        }
    }
}

TEST_CASE("full-oracle lwm solves the fixture in six steps every episode") {
    RunRecord r = run_experiment(fixture_config());
    CHECK_FALSE(r.error);
    REQUIRE(r.episodes.size() == 50);
    for (const auto& e : r.episodes) {
        CHECK(e.size() == 6);
        CHECK(e.total_reward() == doctest::Approx(1.0));
    }
    CHECK(r.total_steps == 300);
    REQUIRE(r.steps_per_success);
    CHECK(*r.steps_per_success == doctest::Approx(6.0));
    CHECK(r.cumulative_return == doctest::Approx(50.0));
}

TEST_CASE("random agent return on the generated lakes") {
    RunConfig c;
    c.agent = "random";
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
    auto records = run_seeds(c, seeds, 4);
    std::vector<double> returns;
    for (const auto& r : records) returns.push_back(r.cumulative_return);
    auto ci = ci95(returns);
    REQUIRE(ci.half_width);
    // published: -80.00 +- 4.49
    CHECK(ci.mean - *ci.half_width <= -80.0 + 4.49);
    CHECK(ci.mean + *ci.half_width >= -80.0 - 4.49);
}

TEST_CASE("identical runs write identical logs") {
    auto dir_a = temp_dir("det_a");
    auto dir_b = temp_dir("det_b");
    RunConfig c = fixture_config();
    c.backend = "oracle-facts";
    c.steps = 60;
    c.trace = true;
    c.out = dir_a.string();
    run_experiment(c);
    c.out = dir_b.string();
    run_experiment(c);
    const std::string stem = run_stem(c);
    for (const auto* ext : {".jsonl", ".summary.json", ".trace.jsonl"}) {
        const auto a = slurp(dir_a / (stem + ext));
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(dir_b / (stem + ext)));
    }
}

TEST_CASE("summary json") {
    RunConfig c = fixture_config();
    c.steps = 12;
    RunRecord r = run_experiment(c);
    auto j = summary_json(r);
    CHECK(j["schema"] == kLogSchema);
    CHECK(j["agent"] == "lwm");
    CHECK(j["total_steps"] == 12);
    CHECK(j["episodes"] == 2);
    CHECK(j["successes"] == 2);
    CHECK(j["steps_per_success"] == 6.0);

    RunRecord empty;
    CHECK(summary_json(empty)["steps_per_success"].is_null());
}

TEST_CASE("aggregate") {
    auto summary = [](std::string agent, std::uint64_t seed, double ret, std::optional<double> sps) {
        nlohmann::json j{{"schema", kLogSchema}, {"agent", agent}, {"env", "frozenlake"}, {"seed", seed},
                         {"cumulative_return", ret}};
        j["steps_per_success"] = sps ? nlohmann::json(*sps) : nlohmann::json(nullptr);
        return j;
    };
    std::vector<nlohmann::json> s{
        summary("random", 0, -80, std::nullopt), summary("random", 1, -82, std::nullopt),
        summary("lwm", 0, 30, 6.0),              summary("lwm", 1, 32, 6.0),
        summary("react", 0, 10, 12.0),           summary("react", 1, 0, std::nullopt),
    };
    auto rows = aggregate(s);
    auto find = [&](const std::string& agent, const std::string& metric) -> const MetricRow& {
        for (const auto& r : rows)
            if (r.agent == agent && r.metric == metric) return r;
        FAIL("missing row " << agent << " " << metric);
        return rows.front();
    };
    CHECK(*find("random", "normalized_score").mean == doctest::Approx(0.0));
    CHECK(*find("lwm", "normalized_score").mean == doctest::Approx(100.0));
    CHECK(*find("react", "normalized_score").mean == doctest::Approx(100.0 * (5 + 81) / (31.0 + 81)));
    CHECK(*find("lwm", "cumulative_return").mean == doctest::Approx(31.0));
    CHECK(find("lwm", "cumulative_return").n == 2);
    CHECK_FALSE(find("random", "steps_per_success").mean);
    CHECK(*find("react", "steps_per_success").mean == doctest::Approx(12.0));

    auto anchored = aggregate(s, {{"frozenlake", 41.0}});
    for (const auto& r : anchored)
        if (r.agent == "lwm" && r.metric == "normalized_score")
            CHECK(*r.mean == doctest::Approx(100.0 * (31 + 81) / (41.0 + 81)));

    std::ostringstream csv;
    write_metrics_csv(csv, rows);
    const std::string text = csv.str();
    CHECK(text.rfind("agent,env,metric,mean,ci95,n\n", 0) == 0);
    CHECK(text.find("random,frozenlake,steps_per_success,--,--,0") != std::string::npos);
}

TEST_CASE("run stems") {
    RunConfig c;
    c.agent = "react";
    c.seed = 3;
    CHECK(run_stem(c) == "react_frozenlake_seed3");
}

TEST_CASE("command line run and eval") {
    auto dir = temp_dir("cli");
    const std::string cli = LWM_CLI;
    const std::string run = cli + " run --env frozenlake --agent random --seeds 0,1,2 --steps 40 --out " +
                            dir.string() + " > " + (dir / "stdout.txt").string();
    REQUIRE(std::system(run.c_str()) == 0);
    CHECK(std::filesystem::exists(dir / "random_frozenlake_seed1.jsonl"));
    CHECK(std::filesystem::exists(dir / "random_frozenlake_seed2.summary.json"));
    const auto table = dir / "table.csv";
    const std::string eval = cli + " eval --runs " + dir.string() + " --out " + table.string();
    REQUIRE(std::system(eval.c_str()) == 0);
    const auto text = slurp(table);
    CHECK(text.find("random,frozenlake,cumulative_return") != std::string::npos);

    const std::string bad = cli + " run --agent nobody > /dev/null 2>&1";
    CHECK(std::system(bad.c_str()) != 0);
}

TEST_CASE("command line config file, flags win") {
    auto dir = temp_dir("cli_config");
    const auto conf = dir / "run.conf";
    std::ofstream(conf) << "# flat keys\nagent = random\nsteps = 10\nseed = 4\nhole_density = 0.5\nout = "
                        << dir.string() << "\n";
    const std::string cli = LWM_CLI;
    const std::string run = cli + " run --config " + conf.string() + " --steps 12 > /dev/null";
    REQUIRE(std::system(run.c_str()) == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "random_frozenlake_seed4.summary.json"));
    CHECK(summary["step_budget"] == 12);
    CHECK(summary["agent"] == "random");
}

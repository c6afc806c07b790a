#include <doctest.h>

#include "lwm/errors.hpp"
#include "lwm/log.hpp"
#include "lwm/planner.hpp"
#include "lwm/prompts.hpp"
#include "support.hpp"

using namespace lwm;

namespace {

HistoryBuffer start_history(const Observation& obs) {
    HistoryBuffer h;
    h.push(HistoryKind::Obs, obs);
    return h;
}

std::vector<AtomicFact> fixture_facts() {
    const auto b = case_study_board();
    std::vector<AtomicFact> out;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            const std::string cell = "(" + std::to_string(r) + "," + std::to_string(c) + ")";
            if (b.at({r, c}) == LakeTile::Hole) out.push_back(cell + " is a hole.");
            if (b.at({r, c}) == LakeTile::Ice) out.push_back(cell + " is ice.");
        }
    }
    return out;
}

}  // namespace

TEST_CASE("compute_q") {
    CHECK(compute_q(1.0, 0.01, 0.99, 0.0) == doctest::Approx(0.99));
    CHECK(compute_q(0.0, 0.0, 0.99, 1.0) == doctest::Approx(0.99));
    CHECK(compute_q(-1.0, 0.01, 0.99, 0.0) == doctest::Approx(-1.01));
}

TEST_CASE("plan config validation") {
    PlanConfig c;
    CHECK_NOTHROW(c.validate());
    c.depth = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = PlanConfig{};
    c.branch = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = PlanConfig{};
    c.gamma = 1.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = PlanConfig{};
    c.step_penalty = -0.1;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("cache keys") {
    FactMemory a;
    a.insert("x");
    a.insert("y");
    FactMemory b;
    b.insert("y");
    b.insert("x");
    const std::deque<std::string> h{"Obs: o"};
    CHECK(cache_key(QueryKind::Simulate, "o", "up", h, a.digest()) == cache_key(QueryKind::Simulate, "o", "up", h, b.digest()));
    CHECK(cache_key(QueryKind::Simulate, "o", "up", h, a.digest()) != cache_key(QueryKind::Simulate, "o", "down", h, a.digest()));
    CHECK(cache_key(QueryKind::Value, "o", std::nullopt, h, a.digest()) != cache_key(QueryKind::Propose, "o", std::nullopt, h, a.digest()));
    CHECK(cache_key(QueryKind::Value, "o", std::nullopt, h, a.digest()) != cache_key(QueryKind::Value, "o", std::nullopt, {}, a.digest()));
}

TEST_CASE("fixture with complete facts plans right from the start") {
    auto model = std::make_shared<FrozenLakeModel>(case_study_board());
    OracleBackend backend(model, {Visibility::FactsOnly, {}});
    FactMemory facts;
    for (const auto& f : fixture_facts()) facts.insert(f);
    const Observation obs = "You are at (0, 0) on start.";
    const auto desc = frozen_lake_description(4, 0.9);
    const auto action = plan_action(obs, start_history(obs), facts, PlanConfig{}, backend, desc, frozen_lake_actions());
    CHECK(action == "right");
    CHECK(testing::brute_force_lake(*model, {0, 0}, 3, 0.99, 0.01) == "right");
}

TEST_CASE("node value at (2,3) with depth 1 is 0.99") {
    auto model = std::make_shared<FrozenLakeModel>(case_study_board());
    OracleBackend backend(model);
    const Observation obs = "You are at (2, 3) on ice.";
    Planner planner(backend, frozen_lake_description(4, 0.9), frozen_lake_actions(), PlanConfig{});
    CHECK(planner.estimate_node_value(obs, start_history(obs), {}, 1) == doctest::Approx(0.99).epsilon(1e-12));
    // Depth 0 is exactly the estimator's answer.
    CHECK(planner.estimate_node_value(obs, start_history(obs), {}, 0) ==
          model->value({obs, {}, {}}, Visibility::Full, 0.99, 0.01));
}

TEST_CASE("singleton proposal and ties") {
    const auto desc = frozen_lake_description(4, 0.0);
    auto empty_lake = std::make_shared<FrozenLakeModel>(gen_frozen_lake(4, 0.0, 1));
    OracleBackend inner(empty_lake, {Visibility::Full, {"right", "down", "left", "up"}});
    const Observation obs = "You are at (0, 0) on start.";

    // right and down have equal value on an empty board: the first proposed wins.
    CHECK(plan_action(obs, start_history(obs), {}, PlanConfig{}, inner, desc, frozen_lake_actions()) == "right");
    OracleBackend flipped(empty_lake, {Visibility::Full, {"down", "right", "left", "up"}});
    CHECK(plan_action(obs, start_history(obs), {}, PlanConfig{}, flipped, desc, frozen_lake_actions()) == "down");

    FunctionBackend only_up([&](const LlmCall& c) {
        if (c.function.name == "propose_actions") return testing::reply("propose_actions", {{"actions", {"up"}}});
        return inner.complete(c);
    });
    CHECK(plan_action(obs, start_history(obs), {}, PlanConfig{}, only_up, desc, frozen_lake_actions()) == "up");
}

TEST_CASE("empty proposal falls back to a random legal action") {
    FunctionBackend none([](const LlmCall& c) {
        if (c.function.name == "propose_actions") return testing::reply("propose_actions", {{"actions", nlohmann::json::array()}});
        throw SimulationError("unexpected");
    });
    WarningCapture warnings;
    const auto a = plan_action("o", {}, {}, PlanConfig{}, none, "d", frozen_lake_actions(), 3);
    CHECK(std::find(frozen_lake_actions().begin(), frozen_lake_actions().end(), a) != frozen_lake_actions().end());
    CHECK(warnings.contains("no actions"));
}

TEST_CASE("failed branches score minus infinity") {
    auto model = std::make_shared<FrozenLakeModel>(case_study_board());
    OracleBackend oracle(model, {Visibility::Full, {"right", "down", "left", "up"}});
    FunctionBackend flaky([&](const LlmCall& c) {
        if (c.function.name == "simulate_step" && prompts::section(c.user, prompts::kActionHeader) == "right") {
            throw SimulationError("model hiccup");
        }
        return oracle.complete(c);
    });
    WarningCapture warnings;
    const Observation obs = "You are at (0, 0) on start.";
    Planner planner(flaky, "d", frozen_lake_actions(), PlanConfig{});
    const auto a = planner.plan(obs, start_history(obs), {});
    CHECK(a != "right");
    CHECK(planner.last_stats().failed_branches >= 1);
    CHECK(planner.last_root().front().first == "right");
    CHECK(planner.last_root().front().second == -std::numeric_limits<double>::infinity());
    CHECK(warnings.contains("model hiccup"));

    FunctionBackend broken([&](const LlmCall& c) {
        if (c.function.name == "simulate_step") throw SimulationError("down");
        return oracle.complete(c);
    });
    CHECK_THROWS_AS(plan_action(obs, {}, {}, PlanConfig{}, broken, "d", frozen_lake_actions()), PlanningError);

    FunctionBackend missing([&](const LlmCall& c) -> LlmResult {
        if (c.function.name == "simulate_step") throw MissingCassette("no entry");
        return oracle.complete(c);
    });
    CHECK_THROWS_AS(plan_action(obs, {}, {}, PlanConfig{}, missing, "d", frozen_lake_actions()), MissingCassette);
}

TEST_CASE("known terminal observations are not expanded") {
    auto model = std::make_shared<FrozenLakeModel>(case_study_board());
    OracleBackend oracle(model);
    CountingBackend counting(oracle);
    Planner planner(counting, "d", frozen_lake_actions(), PlanConfig{});
    const Observation hole = "You are at (1, 0) on hole.";
    planner.terminals().insert(hole);
    CHECK(planner.estimate_node_value(hole, {}, {}, 3) == 0.0);
    CHECK(counting.count("propose_actions") == 0);
    CHECK(counting.count("estimate_value") == 1);
}

TEST_CASE("memoization: one backend call per distinct key") {
    auto model = std::make_shared<FrozenLakeModel>(gen_frozen_lake(4, 0.3, 8));
    OracleBackend oracle(model);
    CountingBackend counting(oracle);
    PlanConfig cfg;
    cfg.branch = 4;
    // A two-line history window makes A-then-B and B-then-A paths collide.
    Planner planner(counting, "d", frozen_lake_actions(), cfg);
    const Observation obs = "You are at (0, 0) on start.";
    planner.plan(obs, HistoryBuffer(2), {});
    CHECK(counting.total() == counting.distinct_keys());
    CHECK(counting.max_repeats() == 1);
    CHECK(planner.last_stats().cache_hits > 0);
    CHECK(planner.last_stats().backend_calls == counting.total());
}

TEST_CASE("parallel and sequential plans agree") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto model = std::make_shared<FrozenLakeModel>(gen_frozen_lake(5, 0.5, seed));
        OracleBackend oracle(model);
        PlanConfig seq;
        PlanConfig par;
        par.parallel = true;
        const Observation obs = "You are at (0, 0) on start.";
        CHECK(plan_action(obs, start_history(obs), {}, seq, oracle, "d", frozen_lake_actions()) ==
              plan_action(obs, start_history(obs), {}, par, oracle, "d", frozen_lake_actions()));
    }
}

TEST_CASE("planner equals brute force on random lakes") {
    const std::vector<std::string> order = frozen_lake_actions();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto board = gen_frozen_lake(4, 0.5, seed);
        auto model = std::make_shared<FrozenLakeModel>(board);
        OracleBackend oracle(model, {Visibility::Full, order});
        for (int depth = 1; depth <= 3; ++depth) {
            PlanConfig cfg;
            cfg.depth = depth;
            cfg.branch = 4;
            for (int r = 0; r < 4; ++r) {
                for (int c = 0; c < 4; ++c) {
                    const auto tile = board.at({r, c});
                    if (tile == LakeTile::Hole || tile == LakeTile::Goal) continue;
                    const auto obs = render_lake_observation(board, {r, c});
                    const auto got = plan_action(obs, start_history(obs), {}, cfg, oracle, "d", order);
                    CHECK(got == testing::brute_force_lake(*model, {r, c}, depth, cfg.gamma, cfg.step_penalty));
                }
            }
        }
    }
}

TEST_CASE("trace records every evaluated branch") {
    auto model = std::make_shared<FrozenLakeModel>(case_study_board());
    OracleBackend oracle(model);
    PlanConfig cfg;
    cfg.depth = 1;
    Planner planner(oracle, "d", frozen_lake_actions(), cfg);
    std::vector<nlohmann::json> records;
    planner.set_trace([&](const nlohmann::json& j) { records.push_back(j); });
    const Observation obs = "You are at (0, 0) on start.";
    planner.plan(obs, start_history(obs), {});
    REQUIRE(records.size() == 4);
    for (const auto& r : records) {
        for (const char* key : {"depth", "obs", "action", "r", "v_next", "q"}) CHECK(r.contains(key));
        CHECK(r["q"].get<double>() == doctest::Approx(compute_q(r["r"], 0.01, 0.99, r["v_next"])));
    }
}

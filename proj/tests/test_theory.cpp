#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lwm/errors.hpp"
#include "lwm/theory.hpp"

using namespace lwm;
using namespace lwm::theory;

namespace {

// n states, one action, deterministic successor next[s], reward r[s].
TabularMdp chain(const std::vector<int>& next, const std::vector<double>& r, double gamma) {
    TabularMdp m;
    m.n_states = static_cast<int>(next.size());
    m.n_actions = 1;
    m.gamma = gamma;
    m.T.assign(m.n_states, std::vector<std::vector<double>>(1, std::vector<double>(m.n_states, 0.0)));
    m.R.assign(m.n_states, std::vector<double>(1, 0.0));
    for (int s = 0; s < m.n_states; ++s) {
        m.T[s][0][next[s]] = 1.0;
        m.R[s][0] = r[s];
    }
    return m;
}

// Independent optimal-value oracle: plain value iteration run far past
// convergence, no early exit.
std::vector<double> brute_values(const TabularMdp& m) {
    std::vector<double> v(m.n_states, 0.0);
    for (int it = 0; it < 20000; ++it) {
        std::vector<double> nv(m.n_states);
        for (int s = 0; s < m.n_states; ++s) {
            double best = -1e300;
            for (int a = 0; a < m.n_actions; ++a) {
                double q = m.R[s][a];
                for (int t = 0; t < m.n_states; ++t) q += m.gamma * m.T[s][a][t] * v[t];
                best = std::max(best, q);
            }
            nv[s] = best;
        }
        v = nv;
    }
    return v;
}

}  // namespace

TEST_CASE("identity abstraction is a fixed point") {
    auto g = random_mdp(7, 3, 0.9, 11);
    auto a = build_abstract_mdp(g, Abstraction::identity(7));
    CHECK(a.n_states == 7);
    for (int s = 0; s < 7; ++s)
        for (int act = 0; act < 3; ++act) {
            CHECK(a.R[s][act] == doctest::Approx(g.R[s][act]).epsilon(1e-15));
            for (int t = 0; t < 7; ++t) CHECK(a.T[s][act][t] == doctest::Approx(g.T[s][act][t]).epsilon(1e-15));
        }
    CHECK(epsilon_sim(g, Abstraction::identity(7), a) == doctest::Approx(0.0));
}

TEST_CASE("merging a reward-split chain") {
    auto g = chain({2, 2, 2}, {0.0, 1.0, 0.0}, 0.9);
    Abstraction psi{{0, 0, 1}, 2};
    auto a = build_abstract_mdp(g, psi);
    CHECK(a.R[0][0] == doctest::Approx(0.5));
    CHECK(a.T[0][0][1] == doctest::Approx(1.0));
    CHECK(epsilon_sim(g, psi, a) == doctest::Approx(0.5));

    // lifting is a table lookup through psi
    CHECK(lift_policy({0, 0}, psi) == Policy{0, 0, 0});
    CHECK(lift_policy({1, 0}, Abstraction{{1, 0, 1}, 2}) == Policy{0, 1, 0});
}

TEST_CASE("merging identical states keeps their row") {
    auto g = chain({2, 2, 2}, {0.3, 0.3, 1.0}, 0.9);
    Abstraction psi{{0, 0, 1}, 2};
    auto a = build_abstract_mdp(g, psi);
    CHECK(a.R[0][0] == doctest::Approx(0.3));
    CHECK(a.T[0][0][1] == doctest::Approx(1.0));
    CHECK(epsilon_sim(g, psi, a) == doctest::Approx(0.0));
    auto report = check_ifba_bound(g, psi, 0.0);
    CHECK(report.lhs == doctest::Approx(0.0));
    CHECK(report.holds);
}

TEST_CASE("abstraction validation") {
    auto g = chain({1, 1}, {0, 0}, 0.5);
    CHECK_THROWS_AS(build_abstract_mdp(g, Abstraction{{0, 0}, 2}), InvalidArgument);
    CHECK_THROWS_AS(build_abstract_mdp(g, Abstraction{{0}, 1}), InvalidArgument);
    auto bad = g;
    bad.T[0][0][1] = 0.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = g;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("value iteration hand cases") {
    CHECK(value_iteration(chain({0, 0}, {0, 0}, 0.9)).v == std::vector<double>{0.0, 0.0});

    auto one_step = chain({1, 1}, {1.0, 0.0}, 0.99);
    CHECK(value_iteration(one_step).v[0] == doctest::Approx(1.0));

    auto absorbing = chain({0}, {1.0}, 0.5);
    CHECK(value_iteration(absorbing).v[0] == doctest::Approx(2.0));

    auto loop = chain({1, 0}, {1.0, 1.0}, 0.9);
    auto pe = policy_evaluation(loop, {0, 0});
    CHECK(pe.v[0] == doctest::Approx(10.0));
    CHECK(pe.v[1] == doctest::Approx(10.0));
    auto exact = policy_evaluation_exact(loop, {0, 0});
    CHECK(exact[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("value iteration agrees with a long fixed-point run") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto m = random_mdp(3 + static_cast<int>(seed % 10), 1 + static_cast<int>(seed % 4), 0.9, seed);
        auto vi = value_iteration(m, 1e-10);
        CHECK(vi.residual <= 1e-10);
        CHECK(vi.sweeps <= value_iteration_sweep_bound(m, 1e-10));
        auto ref = brute_values(m);
        auto opt = solve_optimal(m);
        for (int s = 0; s < m.n_states; ++s) {
            CHECK(std::abs(vi.v[s] - ref[s]) < 1e-8);
            CHECK(std::abs(opt.v[s] - ref[s]) < 1e-9);
        }
        // greedy policy evaluated is optimal
        auto pe = policy_evaluation(m, greedy_policy(m, vi.v), 1e-10);
        for (int s = 0; s < m.n_states; ++s) CHECK(std::abs(pe.v[s] - vi.v[s]) < 1e-8);
    }
}

TEST_CASE("greedy ties go to the lowest action") {
    TabularMdp m = chain({0}, {1.0}, 0.5);
    m.n_actions = 3;
    m.T[0] = {{1.0}, {1.0}, {1.0}};
    m.R[0] = {0.0, 1.0, 1.0};
    CHECK(greedy_policy(m, value_iteration(m).v) == Policy{1});
}

TEST_CASE("decomposition") {
    SUBCASE("identity with optimal policy") {
        auto g = random_mdp(6, 2, 0.9, 4);
        auto id = Abstraction::identity(6);
        auto abs = build_abstract_mdp(g, id);
        auto d = decompose_value_loss(g, id, abs, solve_optimal(abs).policy);
        CHECK(std::abs(d.a) < 1e-9);
        CHECK(std::abs(d.b) < 1e-9);
        CHECK(std::abs(d.c) < 1e-9);
    }
    SUBCASE("abstract-optimal policy has no planning term") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            auto g = random_mdp(10, 3, 0.95, seed);
            auto psi = random_abstraction(10, seed + 100);
            auto abs = build_abstract_mdp(g, psi);
            auto d = decompose_value_loss(g, psi, abs, solve_optimal(abs).policy);
            CHECK(std::abs(d.b) < 1e-9);
            CHECK(std::abs(d.a + d.b + d.c - d.total) < 1e-9);
        }
    }
}

TEST_CASE("eps_plan policy") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto abs = random_mdp(6, 3, 0.9, seed);
        auto greedy = eps_plan_policy(abs, 0.0);
        CHECK(greedy.policy == solve_optimal(abs).policy);
        CHECK_FALSE(greedy.perturbed_state);
        auto loose = eps_plan_policy(abs, 0.1);
        CHECK(loose.loss <= 0.1 + 1e-12);
        auto v_star = solve_optimal(abs).v;
        auto v_pi = policy_evaluation_exact(abs, loose.policy);
        double worst = 0.0;
        for (int s = 0; s < abs.n_states; ++s) worst = std::max(worst, v_star[s] - v_pi[s]);
        CHECK(loose.loss == doctest::Approx(worst).epsilon(1e-9));
    }
}

TEST_CASE("bound holds on random instances") {
    SweepSpec spec;
    spec.instances = 60;
    auto rows = run_sweep(spec, 4);
    CHECK(rows.size() == 120);
    for (const auto& r : rows) {
        CHECK(r.report.holds);
        CHECK(r.report.abstraction_gap_holds);
        CHECK(r.telescoping_residual <= 1e-9);
        CHECK(r.report.lhs >= -1e-9);
        CHECK(r.report.realized_plan_loss <= r.report.eps_plan + 1e-12);
        CHECK(r.report.rhs ==
              doctest::Approx(2 * r.report.eps_sim / (1 - r.gamma) + r.report.eps_plan));
    }
}

TEST_CASE("identity abstraction has zero loss") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto g = random_mdp(8, 3, 0.9, seed);
        auto rep = check_ifba_bound(g, Abstraction::identity(8), 0.0);
        CHECK(std::abs(rep.lhs) < 1e-9);
        CHECK(rep.eps_sim == doctest::Approx(0.0));
        CHECK(rep.holds);
    }
}

TEST_CASE("sweep spec parsing") {
    auto s = SweepSpec::parse("# comment\ninstances = 5\ngammas = 0.5, 0.8\nseed=9\n\n");
    CHECK(s.instances == 5);
    CHECK(s.gammas == std::vector<double>{0.5, 0.8});
    CHECK(s.seed == 9);
    CHECK_THROWS_AS(SweepSpec::parse("bogus = 1\n"), InvalidArgument);
    CHECK_THROWS(SweepSpec::parse("instances = lots\n"));
}

TEST_CASE("sweep csv") {
    SweepSpec spec;
    spec.instances = 3;
    spec.delta = 0.05;
    auto rows = run_sweep(spec);
    std::ostringstream out;
    write_sweep_csv(out, rows);
    std::istringstream in(out.str());
    std::string first, header;
    std::getline(in, first);
    std::getline(in, header);
    CHECK(first == std::string("# ") + kEpsSimDefinition);
    CHECK(header.rfind("instance,n_states,n_actions,n_abstract,gamma,eps_sim,eps_plan,lhs,rhs,holds,A,B,C", 0) == 0);
    CHECK(header.find("model_within") != std::string::npos);
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == 6);
}

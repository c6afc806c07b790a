// lwm: run agents, aggregate run directories, and sweep the abstraction
// bound checks.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lwm/errors.hpp"
#include "lwm/harness.hpp"
#include "lwm/log.hpp"
#include "lwm/theory.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Expands "run --config FILE" into leading flags. Keys given explicitly on
// the command line are skipped so flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    if (args.size() < 2 || args[1] != "run") return args;
    auto it = std::find(args.begin(), args.end(), "--config");
    if (it == args.end() || it + 1 == args.end()) return args;
    const std::string path = *(it + 1);
    args.erase(it, it + 2);
    std::ifstream in(path);
    if (!in) throw lwm::InvalidArgument("cannot read config " + path);
    std::vector<std::string> extra;
    for (std::string line; std::getline(in, line);) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string t) {
            const auto b = t.find_first_not_of(" \t\r");
            const auto e = t.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty()) throw lwm::InvalidArgument("config line without '=': " + line);
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
        if (key == "parallel" || key == "trace") {
            if (value == "true" || value == "1" || value == "on") extra.push_back(flag);
            continue;
        }
        extra.push_back(flag);
        extra.push_back(value);
    }
    args.insert(args.begin() + 2, extra.begin(), extra.end());
    return args;
}

int cmd_run(lwm::RunConfig config, const std::vector<std::uint64_t>& seeds, int jobs,
            const std::string& proposal_order, const std::string& compress) {
    if (compress != "on" && compress != "off") throw lwm::InvalidArgument("--compress takes on|off");
    config.compress = compress == "on";
    config.proposal_order = split_csv(proposal_order);

    std::vector<lwm::RunRecord> records;
    if (seeds.empty()) {
        records.push_back(lwm::run_experiment(config));
    } else {
        records = lwm::run_seeds(config, seeds, jobs);
    }
    int failures = 0;
    for (const auto& r : records) {
        std::cout << lwm::summary_json(r).dump() << '\n';
        failures += r.error.has_value();
    }
    return failures == 0 ? 0 : 1;
}

int cmd_eval(const std::string& runs, const std::string& out) {
    const auto rows = lwm::aggregate(lwm::load_summaries(runs));
    if (out.empty() || out == "-") {
        lwm::write_metrics_csv(std::cout, rows);
    } else {
        std::ofstream f(out);
        if (!f) throw lwm::InvalidArgument("cannot write " + out);
        lwm::write_metrics_csv(f, rows);
        std::cerr << "wrote " << rows.size() << " rows to " << out << '\n';
    }
    return 0;
}

int cmd_theory(const std::string& spec_file, const std::string& out, int jobs) {
    const auto spec = spec_file.empty() ? lwm::theory::SweepSpec{} : lwm::theory::SweepSpec::load(spec_file);
    const auto rows = lwm::theory::run_sweep(spec, jobs);
    std::size_t held = 0;
    for (const auto& r : rows) held += r.report.holds && r.report.abstraction_gap_holds;
    if (out.empty() || out == "-") {
        lwm::theory::write_sweep_csv(std::cout, rows);
    } else {
        std::ofstream f(out);
        if (!f) throw lwm::InvalidArgument("cannot write " + out);
        lwm::theory::write_sweep_csv(f, rows);
    }
    std::cerr << held << "/" << rows.size() << " rows satisfy both bounds\n";
    return held == rows.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LWM-Planner experiments"};
    app.require_subcommand(1);

    lwm::RunConfig config;
    std::vector<std::uint64_t> seeds;
    int jobs = 1;
    std::string proposal_order;
    std::string compress = "on";

    auto* run = app.add_subcommand("run", "play one agent on one environment for a step budget");
    std::string config_file;
    run->add_option("--config", config_file, "flat key = value file mirroring the flags; flags win");
    run->add_option("--env", config.env, "frozenlake | crafter")->check(CLI::IsMember({"frozenlake", "crafter"}));
    run->add_option("--agent", config.agent, "random | react | reflexion | react_fec | lwm")
        ->check(CLI::IsMember(lwm::agent_names()));
    run->add_option("--seed", config.seed);
    run->add_option("--seeds", seeds, "several seeds; overrides --seed")->delimiter(',');
    run->add_option("--jobs", jobs, "worker threads for --seeds")->check(CLI::PositiveNumber);
    run->add_option("--steps", config.steps, "environment step budget")->check(CLI::PositiveNumber);
    run->add_option("--size", config.size, "grid size (0: environment default)");
    run->add_option("--hole-density", config.hole_density);
    run->add_option("--depth", config.depth);
    run->add_option("--branch", config.branch);
    run->add_option("--gamma", config.gamma);
    run->add_option("--step-penalty", config.step_penalty);
    run->add_flag("--parallel", config.parallel, "expand root branches concurrently");
    run->add_option("--backend", config.backend, "http | oracle | oracle-facts | replay")
        ->check(CLI::IsMember({"http", "oracle", "oracle-facts", "replay"}));
    run->add_option("--cassette", config.cassette, "cassette file for --backend replay");
    run->add_option("--record", config.record, "append every backend call to this cassette");
    run->add_option("--compress", compress, "on | off");
    run->add_option("--proposal-order", proposal_order, "comma-separated oracle proposer order");
    run->add_option("--history", config.history_capacity);
    run->add_option("--facts", config.fact_capacity);
    run->add_option("--lessons", config.lesson_capacity);
    run->add_option("--fixture", config.fixture, "board/world file instead of a generated one");
    run->add_option("--out", config.out, "output directory");
    run->add_flag("--trace", config.trace, "write the planner search tree");

    std::string runs_dir;
    std::string eval_out;
    auto* eval = app.add_subcommand("eval", "aggregate run summaries into a metrics table");
    eval->add_option("--runs", runs_dir)->required();
    eval->add_option("--out", eval_out, "CSV path (default stdout)");

    std::string theory_spec;
    std::string theory_out;
    auto* theory = app.add_subcommand("theory", "check abstraction bounds on random tabular MDPs");
    theory->add_option("--spec", theory_spec, "sweep spec file");
    theory->add_option("--out", theory_out, "CSV path (default stdout)");
    theory->add_option("--jobs", jobs)->check(CLI::PositiveNumber);

    std::vector<std::string> args;
    try {
        args = expand_config({argv, argv + argc});
    } catch (const lwm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    std::vector<char*> expanded;
    for (auto& a : args) expanded.push_back(a.data());
    CLI11_PARSE(app, static_cast<int>(expanded.size()), expanded.data());

    try {
        if (*run) return cmd_run(config, seeds, jobs, proposal_order, compress);
        if (*eval) return cmd_eval(runs_dir, eval_out);
        if (*theory) return cmd_theory(theory_spec, theory_out, jobs);
    } catch (const lwm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

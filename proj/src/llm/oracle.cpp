#include "lwm/llm/oracle.hpp"

#include <algorithm>
#include <limits>
#include <regex>
#include <set>

#include "lwm/errors.hpp"
#include "lwm/prompts.hpp"

namespace lwm {

namespace {

const std::regex& cell_regex() {
    static const std::regex re(R"(\(\s*(?:row\s*=\s*)?(\d+)\s*,\s*(?:col\s*=\s*)?(\d+)\s*\))");
    return re;
}

std::optional<GridPos> fact_cell(const std::string& fact) {
    std::smatch m;
    if (!std::regex_search(fact, m, cell_regex())) return std::nullopt;
    return GridPos{std::stoi(m[1].str()), std::stoi(m[2].str())};
}

std::string cell_text(GridPos p) { return "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")"; }

// What a lake fact says about its cell, if anything.
std::optional<LakeTile> lake_fact_kind(const std::string& fact) {
    std::string lower = fact;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.find("not a hole") != std::string::npos || lower.find("not hole") != std::string::npos) {
        return LakeTile::Ice;
    }
    if (lower.find("hole") != std::string::npos) return LakeTile::Hole;
    if (lower.find("goal") != std::string::npos) return LakeTile::Goal;
    if (lower.find("start") != std::string::npos) return LakeTile::Start;
    if (lower.find("ice") != std::string::npos || lower.find("safe") != std::string::npos) return LakeTile::Ice;
    return std::nullopt;
}

std::vector<AtomicFact> drop_known(const std::vector<AtomicFact>& facts, const std::vector<AtomicFact>& known) {
    std::set<std::string> seen;
    for (const auto& k : known) seen.insert(canonicalize_fact(k));
    std::vector<AtomicFact> out;
    for (const auto& f : facts) {
        std::string canon = canonicalize_fact(f);
        if (seen.insert(canon).second) out.push_back(std::move(canon));
    }
    return out;
}

// Keeps the first fact per key; facts without a key are only de-duplicated.
template <class KeyFn>
std::vector<AtomicFact> merge_by_key(const std::vector<AtomicFact>& facts, KeyFn key) {
    std::set<std::string> seen_text;
    std::set<std::string> seen_key;
    std::vector<AtomicFact> out;
    for (const auto& f : facts) {
        std::string canon = canonicalize_fact(f);
        if (canon.empty() || !seen_text.insert(canon).second) continue;
        if (auto k = key(canon)) {
            if (!seen_key.insert(*k).second) continue;
        }
        out.push_back(std::move(canon));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// FrozenLake

FrozenLakeModel::FrozenLakeModel(FrozenLakeBoard board) : board_(std::move(board)) {}

FrozenLakeBoard FrozenLakeModel::belief_board(const std::vector<AtomicFact>& facts) const {
    const int n = board_.size();
    FrozenLakeBoard belief(n, std::vector<LakeTile>(static_cast<std::size_t>(n * n), LakeTile::Ice));
    belief.set(belief.start(), LakeTile::Start);
    belief.set(belief.goal(), LakeTile::Goal);
    for (const auto& f : facts) {
        auto cell = fact_cell(f);
        auto kind = lake_fact_kind(f);
        if (!cell || !kind || !belief.in_bounds(*cell)) continue;
        if (*kind == LakeTile::Start) continue;
        belief.set(*cell, *kind);
    }
    return belief;
}

double FrozenLakeModel::board_value(const FrozenLakeBoard& board, GridPos pos, double gamma, double step_penalty) {
    std::string key = board.to_text() + "|" + format_number(gamma) + "|" + format_number(step_penalty);
    auto& solver = solvers_[key];
    if (!solver) {
        using Solver = DeterministicSolver<GridPos, GridPosHash>;
        solver = std::make_unique<Solver>(
            [board](const GridPos& p) {
                std::vector<Solver::Edge> edges;
                LakeTile here = board.at(p);
                if (here == LakeTile::Hole || here == LakeTile::Goal) return edges;
                for (const auto& a : frozen_lake_actions()) {
                    LakeMove mv = frozen_lake_move(board, p, a);
                    edges.push_back({mv.pos, mv.reward, mv.terminal});
                }
                return edges;
            },
            gamma, step_penalty);
    }
    return solver->value(pos);
}

namespace {

LakeTile tile_for_terrain(const std::string& terrain) {
    if (terrain == "hole") return LakeTile::Hole;
    if (terrain == "goal") return LakeTile::Goal;
    if (terrain == "start") return LakeTile::Start;
    return LakeTile::Ice;
}

}  // namespace

SimulatedStep FrozenLakeModel::simulate(const OracleQuery& q, const ActionName& action, Visibility vis) {
    auto parsed = parse_lake_observation(q.obs);
    if (!parsed || !board_.in_bounds(parsed->pos)) throw SimulationError("cannot read lake observation: " + q.obs);
    if (parsed->terrain == "hole" || parsed->terrain == "goal") return {q.obs, 0.0, true};
    if (std::find(actions().begin(), actions().end(), action) == actions().end()) {
        throw SimulationError("unknown lake action '" + action + "'");
    }
    FrozenLakeBoard board = vis == Visibility::Full ? board_ : belief_board(q.facts);
    board.set(parsed->pos, tile_for_terrain(parsed->terrain));
    GridPos pos = parsed->pos;
    StepResult r = frozen_lake_step(board, pos, action);
    return {r.obs, r.reward, r.done};
}

double FrozenLakeModel::value(const OracleQuery& q, Visibility vis, double gamma, double step_penalty) {
    auto parsed = parse_lake_observation(q.obs);
    if (!parsed || !board_.in_bounds(parsed->pos)) throw EstimationError("cannot read lake observation: " + q.obs);
    if (parsed->terrain == "hole" || parsed->terrain == "goal") return 0.0;
    FrozenLakeBoard board = vis == Visibility::Full ? board_ : belief_board(q.facts);
    board.set(parsed->pos, tile_for_terrain(parsed->terrain));
    return board_value(board, parsed->pos, gamma, step_penalty);
}

bool FrozenLakeModel::is_terminal(const Observation& obs) const {
    auto parsed = parse_lake_observation(obs);
    return parsed && (parsed->terrain == "hole" || parsed->terrain == "goal");
}

std::vector<AtomicFact> FrozenLakeModel::extract_facts(const ParsedTrajectory& episode,
                                                       const std::vector<AtomicFact>& known) {
    std::vector<AtomicFact> facts;
    for (const auto& t : episode.transitions) {
        auto p = parse_lake_observation(t.next_obs);
        if (!p) continue;
        if (p->terrain == "hole") facts.push_back(cell_text(p->pos) + " is a hole.");
    }
    if (episode.outcome == Outcome::Success) {
        for (const auto& t : episode.transitions) {
            auto p = parse_lake_observation(t.next_obs);
            if (!p) continue;
            if (p->terrain == "ice") facts.push_back(cell_text(p->pos) + " is ice.");
            if (p->terrain == "goal") facts.push_back(cell_text(p->pos) + " is the goal.");
        }
    }
    return drop_known(facts, known);
}

std::vector<AtomicFact> FrozenLakeModel::compress(const std::vector<AtomicFact>& facts) {
    return merge_by_key(facts, [](const std::string& f) -> std::optional<std::string> {
        auto cell = fact_cell(f);
        auto kind = lake_fact_kind(f);
        if (!cell || !kind) return std::nullopt;
        return cell_text(*cell) + static_cast<char>(*kind);
    });
}

std::string FrozenLakeModel::lesson(const ParsedTrajectory& episode) {
    if (episode.transitions.empty()) return "";
    const Transition& last = episode.transitions.back();
    if (episode.outcome == Outcome::Success) {
        return "Repeat the route that reached the goal in " + std::to_string(episode.transitions.size()) + " steps.";
    }
    if (episode.outcome == Outcome::Truncated) {
        return "Move steadily toward the goal at " + cell_text(board_.goal()) + " instead of wandering.";
    }
    auto from = parse_lake_observation(last.obs);
    auto to = parse_lake_observation(last.next_obs);
    if (from && to && to->terrain == "hole") {
        return "Avoid moving " + last.action + " from " + cell_text(from->pos) + "; " + cell_text(to->pos) +
               " is a hole.";
    }
    return "Avoid moving into holes by evaluating the safety of the next position before taking an action.";
}

// ---------------------------------------------------------------------------
// Crafter

std::size_t CrafterStateHash::operator()(const CrafterState& s) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    for (auto t : s.tiles) mix(static_cast<unsigned char>(t));
    mix(static_cast<std::uint64_t>(s.agent.row) << 16 | static_cast<std::uint64_t>(s.agent.col));
    mix(static_cast<std::uint64_t>(s.wood) << 40 | static_cast<std::uint64_t>(s.stone) << 20 |
        static_cast<std::uint64_t>(s.iron));
    mix((s.wood_pickaxe ? 1u : 0u) | (s.stone_pickaxe ? 2u : 0u) | (s.iron_pickaxe ? 4u : 0u));
    return static_cast<std::size_t>(h);
}

CrafterModel::CrafterModel(CrafterWorld world, const CrafterEnv* live) : world_(std::move(world)), live_(live) {}

namespace {

void overlay_observation(CrafterState& s, const ParsedCrafterObservation& p) {
    s.agent = s.wrap(p.pos);
    s.set(s.agent, p.here);
    const GridPos a = s.agent;
    const GridPos around[4] = {{a.row - 1, a.col}, {a.row + 1, a.col}, {a.row, a.col + 1}, {a.row, a.col - 1}};
    for (int k = 0; k < 4; ++k) s.set(s.wrap(around[k]), p.neighbors[static_cast<std::size_t>(k)]);
    s.wood = p.wood;
    s.stone = p.stone;
    s.iron = p.iron;
    s.wood_pickaxe = p.wood_pickaxe;
    s.stone_pickaxe = p.stone_pickaxe;
    s.iron_pickaxe = p.iron_pickaxe;
}

const std::regex& crafter_fact_regex() {
    static const std::regex re(R"((tree|stone|iron|water|grass) at \(\s*(\d+)\s*,\s*(\d+)\s*\))");
    return re;
}

}  // namespace

std::optional<CrafterState> CrafterModel::replay_from(const CrafterState& anchor, const OracleQuery& q) const {
    const std::string anchor_obs = render_crafter_observation(anchor);
    const auto& lines = q.history;
    const long size = static_cast<long>(lines.size());
    if (size == 0 || lines.back() != "Obs: " + q.obs) {
        if (q.obs == anchor_obs) return anchor;
        return std::nullopt;
    }
    // Longest simulated suffix first: it is the path that produced q.obs.
    for (long k = (size - 1) / 2; k >= 0; --k) {
        const long start = size - 1 - 2 * k;
        if (lines[static_cast<std::size_t>(start)] != "Obs: " + anchor_obs) continue;
        CrafterState s = anchor;
        bool ok = true;
        for (long j = 0; j < k && ok; ++j) {
            const std::string& act = lines[static_cast<std::size_t>(start + 1 + 2 * j)];
            const std::string& obs = lines[static_cast<std::size_t>(start + 2 + 2 * j)];
            if (!act.starts_with("Act: ") || s.iron_pickaxe) {
                ok = false;
                break;
            }
            try {
                crafter_apply(s, crafter_action_index(act.substr(5)));
            } catch (const InvalidArgument&) {
                ok = false;
                break;
            }
            ok = obs == "Obs: " + render_crafter_observation(s);
        }
        if (ok) return s;
    }
    return std::nullopt;
}

CrafterState CrafterModel::resolve(const OracleQuery& q, Visibility vis) const {
    auto parsed = parse_crafter_observation(q.obs);
    if (!parsed) throw SimulationError("cannot read crafter observation: " + q.obs);
    const int n = world_.size();
    if (parsed->pos.row >= n || parsed->pos.col >= n) throw SimulationError("crafter position outside grid: " + q.obs);

    if (vis == Visibility::Full) {
        if (live_) {
            if (auto s = replay_from(live_->state(), q)) return *s;
        }
        if (auto s = replay_from(world_.initial, q)) return *s;
        // Approximation: unknown history, so take the known grid and trust the observation locally.
        CrafterState s = live_ ? live_->state() : world_.initial;
        overlay_observation(s, *parsed);
        return s;
    }

    CrafterState s;
    s.n = n;
    s.tiles.assign(static_cast<std::size_t>(n * n), CrafterTile::Grass);
    for (const auto& f : q.facts) {
        std::smatch m;
        if (!std::regex_search(f, m, crafter_fact_regex())) continue;
        GridPos p{std::stoi(m[2].str()), std::stoi(m[3].str())};
        if (p.row >= n || p.col >= n) continue;
        s.set(p, *crafter_tile_from_name(m[1].str()));
    }
    overlay_observation(s, *parsed);
    return s;
}

double CrafterModel::state_value(const CrafterState& s, double gamma, double step_penalty) {
    auto& solver = solvers_[{gamma, step_penalty}];
    if (!solver) {
        using Solver = DeterministicSolver<CrafterState, CrafterStateHash>;
        solver = std::make_unique<Solver>(
            [](const CrafterState& from) {
                std::vector<Solver::Edge> edges;
                if (from.iron_pickaxe) return edges;
                edges.reserve(8);
                for (int a = 0; a < 8; ++a) {
                    CrafterState next = from;
                    CrafterOutcome out = crafter_apply(next, a);
                    edges.push_back({std::move(next), out.reward, out.terminal});
                }
                return edges;
            },
            gamma, step_penalty);
    }
    return solver->value(s);
}

SimulatedStep CrafterModel::simulate(const OracleQuery& q, const ActionName& action, Visibility vis) {
    CrafterState s = resolve(q, vis);
    if (s.iron_pickaxe) return {q.obs, 0.0, true};
    int index;
    try {
        index = crafter_action_index(action);
    } catch (const InvalidArgument& e) {
        throw SimulationError(e.what());
    }
    CrafterOutcome out = crafter_apply(s, index);
    return {render_crafter_observation(s), out.reward, out.terminal};
}

double CrafterModel::value(const OracleQuery& q, Visibility vis, double gamma, double step_penalty) {
    auto parsed = parse_crafter_observation(q.obs);
    if (!parsed) throw EstimationError("cannot read crafter observation: " + q.obs);
    if (parsed->iron_pickaxe) return 0.0;
    CrafterState s;
    try {
        s = resolve(q, vis);
    } catch (const SimulationError& e) {
        throw EstimationError(e.what());
    }
    return state_value(s, gamma, step_penalty);
}

bool CrafterModel::is_terminal(const Observation& obs) const {
    auto parsed = parse_crafter_observation(obs);
    return parsed && parsed->iron_pickaxe;
}

std::vector<AtomicFact> CrafterModel::extract_facts(const ParsedTrajectory& episode,
                                                    const std::vector<AtomicFact>& known) {
    std::vector<AtomicFact> facts;
    auto visit = [&](const Observation& obs) {
        auto p = parse_crafter_observation(obs);
        if (!p || p->here == CrafterTile::Grass) return;
        facts.push_back(std::string(crafter_tile_name(p->here)) + " at " + cell_text(p->pos) + ".");
    };
    for (std::size_t i = 0; i < episode.transitions.size(); ++i) {
        if (i == 0) visit(episode.transitions[i].obs);
        visit(episode.transitions[i].next_obs);
    }
    return drop_known(facts, known);
}

std::vector<AtomicFact> CrafterModel::compress(const std::vector<AtomicFact>& facts) {
    return merge_by_key(facts, [](const std::string& f) -> std::optional<std::string> {
        std::smatch m;
        if (!std::regex_search(f, m, crafter_fact_regex())) return std::nullopt;
        return "(" + m[2].str() + "," + m[3].str() + ")";
    });
}

std::string CrafterModel::lesson(const ParsedTrajectory& episode) {
    if (episode.outcome == Outcome::Success) {
        return "Collect one wood, three stone and three iron, then craft stone_pickaxe and iron_pickaxe.";
    }
    return "Gather wood, stone and iron early and craft the stone_pickaxe before the step limit.";
}

// ---------------------------------------------------------------------------
// Backend

OracleBackend::OracleBackend(std::shared_ptr<EnvModel> model, OracleConfig config)
    : model_(std::move(model)), config_(std::move(config)) {
    if (!model_) throw InvalidArgument("oracle backend needs an environment model");
}

OracleQuery OracleBackend::query_from(const std::string& prompt, std::string_view obs_header) const {
    OracleQuery q;
    auto obs = prompts::section(prompt, obs_header);
    if (!obs) throw SimulationError("prompt has no observation section");
    q.obs = *obs;
    if (auto h = prompts::section(prompt, prompts::kHistoryHeader)) q.history = prompts::parse_history(*h);
    if (auto f = prompts::section(prompt, prompts::kFactsHeader)) q.facts = prompts::parse_list(*f);
    return q;
}

double OracleBackend::one_step_q(const OracleQuery& q, const ActionName& action) {
    SimulatedStep s = model_->simulate(q, action, config_.visibility);
    double v = 0.0;
    if (!s.done) {
        OracleQuery next = q;
        next.obs = s.next_obs;
        next.history.push_back("Act: " + action);
        next.history.push_back("Obs: " + s.next_obs);
        v = model_->value(next, config_.visibility, config_.gamma, config_.step_penalty);
    }
    return s.reward - config_.step_penalty + config_.gamma * v;
}

LlmResult OracleBackend::complete(const LlmCall& call) {
    std::lock_guard lock(mu_);
    const std::string& fn = call.function.name;
    const std::string& prompt = call.user;
    nlohmann::json args;

    auto allowed_actions = [&] {
        return prompts::parse_allowed_actions(prompt).value_or(model_->actions());
    };

    if (fn == "propose_actions") {
        const std::vector<ActionName> allowed = allowed_actions();
        std::vector<ActionName> ordered;
        std::string thought = "oracle: fixed proposal order";
        if (config_.proposal_order.empty()) {
            // Best one-step lookahead first; prompt order breaks ties.
            const OracleQuery q = query_from(prompt, prompts::kObservationHeader);
            std::vector<std::pair<double, ActionName>> scored;
            for (const auto& a : allowed) scored.emplace_back(one_step_q(q, a), a);
            std::stable_sort(scored.begin(), scored.end(),
                             [](const auto& x, const auto& y) { return x.first > y.first; });
            for (auto& [_, a] : scored) ordered.push_back(a);
            thought = "oracle: ranked by one-step lookahead";
        }
        for (const auto& a : config_.proposal_order) {
            if (std::find(allowed.begin(), allowed.end(), a) != allowed.end() &&
                std::find(ordered.begin(), ordered.end(), a) == ordered.end()) {
                ordered.push_back(a);
            }
        }
        for (const auto& a : allowed) {
            if (std::find(ordered.begin(), ordered.end(), a) == ordered.end()) ordered.push_back(a);
        }
        const int branch = prompts::parse_branch(prompt).value_or(static_cast<int>(ordered.size()));
        if (branch >= 0 && static_cast<std::size_t>(branch) < ordered.size()) ordered.resize(static_cast<std::size_t>(branch));
        args = {{"thought", thought}, {"actions", ordered}};
    } else if (fn == "simulate_step") {
        OracleQuery q = query_from(prompt, prompts::kObservationHeader);
        auto action = prompts::section(prompt, prompts::kActionHeader);
        if (!action) throw SimulationError("prompt has no action to simulate");
        SimulatedStep s = model_->simulate(q, *action, config_.visibility);
        args = {{"thought", config_.visibility == Visibility::Full ? "oracle: exact dynamics" : "oracle: belief dynamics"},
                {"next_observation", s.next_obs},
                {"reward", s.reward},
                {"done", s.done}};
    } else if (fn == "estimate_value") {
        OracleQuery q;
        try {
            q = query_from(prompt, prompts::kValueObservationHeader);
        } catch (const SimulationError& e) {
            throw EstimationError(e.what());
        }
        auto gamma = prompts::parse_gamma(prompt);
        if (!gamma) throw EstimationError("prompt states no discount factor");
        double v = model_->value(q, config_.visibility, *gamma, config_.step_penalty);
        args = {{"thought", "oracle: optimal value"}, {"value", v}};
    } else if (fn == "fact_extraction") {
        auto episode = parse_trajectory_summary(prompt);
        if (!episode) throw ParseError("fact_extraction prompt has no trajectory summary");
        std::vector<AtomicFact> known;
        if (auto k = prompts::section(prompt, prompts::kKnownFactsHeader)) known = prompts::parse_list(*k);
        args = {{"thought", "oracle: facts revealed by the episode"}, {"new_facts", model_->extract_facts(*episode, known)}};
    } else if (fn == "fact_redundancy_remover") {
        std::vector<AtomicFact> facts;
        if (auto f = prompts::section(prompt, prompts::kCompressionFactsHeader)) facts = prompts::parse_list(*f);
        args = {{"thought", "oracle: merged duplicate facts"}, {"all_facts", model_->compress(facts)}};
    } else if (fn == "react_step") {
        OracleQuery q = query_from(prompt, prompts::kObservationHeader);
        const std::vector<ActionName> allowed = allowed_actions();
        if (allowed.empty()) throw SimulationError("react prompt lists no actions");
        std::size_t best = 0;
        double best_q = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < allowed.size(); ++i) {
            const double qv = one_step_q(q, allowed[i]);
            if (qv > best_q) {
                best_q = qv;
                best = i;
            }
        }
        args = {{"thought", "oracle: greedy one-step lookahead"}, {"action", allowed[best]}};
    } else if (fn == "reflect_lesson") {
        auto episode = parse_trajectory_summary(prompt);
        if (!episode) throw ParseError("reflect_lesson prompt has no trajectory summary");
        args = {{"thought", "oracle: template lesson"}, {"lesson", model_->lesson(*episode)}};
    } else {
        throw ContractError("oracle cannot answer function '" + fn + "'");
    }
    return LlmResult::from_arguments(call.function, args);
}

}  // namespace lwm

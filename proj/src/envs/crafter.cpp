#include "lwm/envs/crafter.hpp"

#include <limits>
#include <regex>
#include <sstream>

#include "lwm/errors.hpp"
#include "lwm/rng.hpp"

namespace lwm {

std::string_view crafter_tile_name(CrafterTile tile) {
    switch (tile) {
        case CrafterTile::Grass: return "grass";
        case CrafterTile::Tree: return "tree";
        case CrafterTile::Stone: return "stone";
        case CrafterTile::Iron: return "iron";
        case CrafterTile::Water: return "water";
    }
    return "grass";
}

std::optional<CrafterTile> crafter_tile_from_name(std::string_view name) {
    for (auto t : {CrafterTile::Grass, CrafterTile::Tree, CrafterTile::Stone, CrafterTile::Iron, CrafterTile::Water}) {
        if (crafter_tile_name(t) == name) return t;
    }
    return std::nullopt;
}

int crafter_action_index(std::string_view action) {
    const auto& names = crafter_actions();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == action) return static_cast<int>(i);
    }
    if (action.size() == 1 && action[0] >= '0' && action[0] <= '7') return action[0] - '0';
    throw InvalidArgument("unknown crafter action '" + std::string(action) + "'");
}

int CrafterState::count(CrafterTile t) const {
    int c = 0;
    for (auto x : tiles) c += x == t;
    return c;
}

std::string CrafterState::key() const {
    std::string k(tiles.size(), ' ');
    for (std::size_t i = 0; i < tiles.size(); ++i) k[i] = static_cast<char>(tiles[i]);
    k += '|';
    k += std::to_string(agent.row) + ',' + std::to_string(agent.col) + '|';
    k += std::to_string(wood) + ',' + std::to_string(stone) + ',' + std::to_string(iron) + '|';
    k += wood_pickaxe ? '1' : '0';
    k += stone_pickaxe ? '1' : '0';
    k += iron_pickaxe ? '1' : '0';
    return k;
}

std::string CrafterWorld::to_text() const {
    std::ostringstream out;
    out << "agent " << initial.agent.row << ' ' << initial.agent.col << '\n';
    for (int r = 0; r < initial.n; ++r) {
        for (int c = 0; c < initial.n; ++c) {
            if (c) out << ' ';
            out << static_cast<char>(initial.at({r, c}));
        }
        out << '\n';
    }
    return out.str();
}

CrafterWorld CrafterWorld::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::optional<GridPos> agent;
    std::vector<std::vector<CrafterTile>> rows;
    while (std::getline(in, line)) {
        std::istringstream words(line);
        std::string word;
        if (!(words >> word)) continue;
        if (word == "agent") {
            GridPos p;
            if (!(words >> p.row >> p.col)) throw InvalidArgument("bad crafter header: " + line);
            agent = p;
            continue;
        }
        std::vector<CrafterTile> row;
        // cells may be space separated or packed ("tgs")
        do {
            for (char ch : word) {
                switch (ch) {
                    case 'g': row.push_back(CrafterTile::Grass); break;
                    case 't': row.push_back(CrafterTile::Tree); break;
                    case 's': row.push_back(CrafterTile::Stone); break;
                    case 'i': row.push_back(CrafterTile::Iron); break;
                    case 'w': row.push_back(CrafterTile::Water); break;
                    default: throw InvalidArgument("bad crafter cell '" + word + "'");
                }
            }
        } while (words >> word);
        rows.push_back(std::move(row));
    }
    if (!agent) throw InvalidArgument("crafter fixture needs an 'agent r c' header");
    const int n = static_cast<int>(rows.size());
    if (n < 2) throw InvalidArgument("crafter fixture must have at least 2 rows");
    CrafterWorld world;
    world.initial.n = n;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n) throw InvalidArgument("crafter fixture must be square");
        world.initial.tiles.insert(world.initial.tiles.end(), row.begin(), row.end());
    }
    if (agent->row < 0 || agent->col < 0 || agent->row >= n || agent->col >= n) {
        throw InvalidArgument("crafter agent position outside the grid");
    }
    world.initial.agent = *agent;
    for (auto t : {CrafterTile::Tree, CrafterTile::Stone, CrafterTile::Iron}) {
        if (world.initial.count(t) == 0) {
            throw InvalidArgument("crafter fixture lacks a " + std::string(crafter_tile_name(t)) + " tile");
        }
    }
    return world;
}

CrafterWorld gen_crafter(int n, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("crafter size must be >= 2");
    SplitMix64 rng(seed);
    CrafterWorld world;
    world.seed = seed;
    CrafterState& s = world.initial;
    s.n = n;
    const int cells = n * n;
    s.tiles.resize(static_cast<std::size_t>(cells));
    for (auto& t : s.tiles) {
        const double u = rng.uniform();
        if (u < 0.45) t = CrafterTile::Grass;
        else if (u < 0.65) t = CrafterTile::Tree;
        else if (u < 0.80) t = CrafterTile::Stone;
        else if (u < 0.90) t = CrafterTile::Iron;
        else t = CrafterTile::Water;
    }

    const bool full_recipe = cells >= 8;
    const std::array<std::pair<CrafterTile, int>, 3> minimum{{
        {CrafterTile::Tree, 1},
        {CrafterTile::Stone, full_recipe ? 3 : 1},
        {CrafterTile::Iron, full_recipe ? 3 : 1},
    }};
    auto required = [&](CrafterTile t) {
        for (auto [kind, m] : minimum) if (kind == t) return m;
        return 0;
    };
    for (auto [kind, m] : minimum) {
        while (s.count(kind) < m) {
            // Candidates: cells whose current tile is not needed to meet its own minimum.
            std::vector<int> spare;
            for (int i = 0; i < cells; ++i) {
                CrafterTile t = s.tiles[static_cast<std::size_t>(i)];
                if (t == kind) continue;
                if (s.count(t) > required(t)) spare.push_back(i);
            }
            if (spare.empty()) throw InvalidArgument("crafter grid too small for the resource guarantee");
            s.tiles[static_cast<std::size_t>(spare[rng.below(spare.size())])] = kind;
        }
    }
    const auto start = static_cast<int>(rng.below(static_cast<std::uint64_t>(cells)));
    s.agent = {start / n, start % n};
    return world;
}

CrafterOutcome crafter_apply(CrafterState& s, int action) {
    CrafterOutcome out{-1.0, false};
    switch (action) {
        case kNorth: s.agent = s.wrap({s.agent.row - 1, s.agent.col}); break;
        case kSouth: s.agent = s.wrap({s.agent.row + 1, s.agent.col}); break;
        case kEast: s.agent = s.wrap({s.agent.row, s.agent.col + 1}); break;
        case kWest: s.agent = s.wrap({s.agent.row, s.agent.col - 1}); break;
        case kCollect: {
            CrafterTile t = s.at(s.agent);
            if (t == CrafterTile::Tree) ++s.wood;
            else if (t == CrafterTile::Stone) ++s.stone;
            else if (t == CrafterTile::Iron) ++s.iron;
            else break;
            s.set(s.agent, CrafterTile::Grass);
            break;
        }
        case kCraftWoodPickaxe:
            if (s.wood >= 3) {
                s.wood -= 3;
                s.wood_pickaxe = true;
                out.reward += 10.0;
            }
            break;
        case kCraftStonePickaxe:
            if (s.wood >= 1 && s.stone >= 3) {
                s.wood -= 1;
                s.stone -= 3;
                s.stone_pickaxe = true;
                out.reward += 20.0;
            }
            break;
        case kCraftIronPickaxe:
            if (s.stone_pickaxe && s.iron >= 3) {
                s.iron -= 3;
                s.stone_pickaxe = false;
                s.iron_pickaxe = true;
                out.reward += 50.0;
                out.terminal = true;
            }
            break;
        default: throw InvalidArgument("crafter action must be in 0..7, got " + std::to_string(action));
    }
    return out;
}

std::string render_crafter_observation(const CrafterState& s) {
    const GridPos p = s.agent;
    auto name = [&](GridPos q) { return crafter_tile_name(s.at(s.wrap(q))); };
    std::ostringstream out;
    out << "You are on " << crafter_tile_name(s.at(p)) << " at (" << p.row << ", " << p.col << "). "
        << "North: " << name({p.row - 1, p.col}) << ", South: " << name({p.row + 1, p.col})
        << ", East: " << name({p.row, p.col + 1}) << ", West: " << name({p.row, p.col - 1}) << ". "
        << "Inventory: wood=" << s.wood << ", stone=" << s.stone << ", iron=" << s.iron << ". Tools: ";
    std::vector<std::string> tools;
    if (s.wood_pickaxe) tools.emplace_back("wood_pickaxe");
    if (s.stone_pickaxe) tools.emplace_back("stone_pickaxe");
    if (s.iron_pickaxe) tools.emplace_back("iron_pickaxe");
    if (tools.empty()) {
        out << "none";
    } else {
        for (std::size_t i = 0; i < tools.size(); ++i) out << (i ? ", " : "") << tools[i];
    }
    out << ".";
    return out.str();
}

std::optional<ParsedCrafterObservation> parse_crafter_observation(std::string_view obs) {
    static const std::regex re(
        R"(^\s*You are on (\w+) at \((\d+), (\d+)\)\. North: (\w+), South: (\w+), East: (\w+), West: (\w+)\. )"
        R"(Inventory: wood=(\d+), stone=(\d+), iron=(\d+)\. Tools: ([a-z_, ]+)\.\s*$)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(obs.begin(), obs.end(), m, re)) return std::nullopt;
    ParsedCrafterObservation p{};
    auto here = crafter_tile_from_name(m[1].str());
    if (!here) return std::nullopt;
    p.here = *here;
    p.pos = {std::stoi(m[2].str()), std::stoi(m[3].str())};
    for (int k = 0; k < 4; ++k) {
        auto t = crafter_tile_from_name(m[4 + k].str());
        if (!t) return std::nullopt;
        p.neighbors[static_cast<std::size_t>(k)] = *t;
    }
    p.wood = std::stoi(m[8].str());
    p.stone = std::stoi(m[9].str());
    p.iron = std::stoi(m[10].str());
    const std::string tools = m[11].str();
    if (tools != "none") {
        std::istringstream in(tools);
        std::string tool;
        while (std::getline(in, tool, ',')) {
            auto b = tool.find_first_not_of(' ');
            if (b == std::string::npos) continue;
            tool = tool.substr(b);
            if (tool == "wood_pickaxe") p.wood_pickaxe = true;
            else if (tool == "stone_pickaxe") p.stone_pickaxe = true;
            else if (tool == "iron_pickaxe") p.iron_pickaxe = true;
            else return std::nullopt;
        }
    }
    return p;
}

std::string crafter_description(int n) {
    std::ostringstream out;
    out << "CrafterMini: a " << n << "x" << n << " crafting grid world with toroidal (wrap-around) edges.\n"
        << "Coordinates are (row, col) from 0; north decreases the row and east increases the column.\n"
        << "Each tile is grass, tree, stone, iron or water. Water can be walked over.\n"
        << "Goal: craft an iron_pickaxe.\n"
        << "Actions (integer: name):\n"
        << "  0: north - move one tile north\n"
        << "  1: south - move one tile south\n"
        << "  2: east - move one tile east\n"
        << "  3: west - move one tile west\n"
        << "  4: collect - gather the resource on the current tile (tree gives wood, stone gives stone, iron gives iron); "
        << "the tile turns to grass\n"
        << "  5: craft_wood_pickaxe - requires 3 wood\n"
        << "  6: craft_stone_pickaxe - requires 1 wood and 3 stone\n"
        << "  7: craft_iron_pickaxe - requires a stone_pickaxe and 3 iron; the stone_pickaxe is consumed\n"
        << "Ingredients are consumed when crafting. Crafting or collecting when it is not possible does nothing.\n"
        << "Rewards: every step costs -1. Crafting a wood_pickaxe gives +10, a stone_pickaxe +20, "
        << "an iron_pickaxe +50.\n"
        << "The episode ends immediately when an iron_pickaxe is crafted, or after " << 4 * n * n << " steps.\n"
        << "Observations look like \"You are on <tile> at (r, c). North: <tile>, South: <tile>, East: <tile>, "
        << "West: <tile>. Inventory: wood=W, stone=S, iron=I. Tools: <list or none>.\"\n"
        << "Allowed actions: north, south, east, west, collect, craft_wood_pickaxe, craft_stone_pickaxe, "
        << "craft_iron_pickaxe.";
    return out.str();
}

// ---------------------------------------------------------------------------

CrafterEnv::CrafterEnv(CrafterWorld world) : world_(std::move(world)) {
    const int n = world_.size();
    spec_.name = "crafter";
    spec_.allowed_actions = crafter_actions();
    spec_.description = crafter_description(n);
    spec_.max_steps = world_.max_steps();
    // Any natural ending is a crafted iron pickaxe, so the reward bar is open.
    spec_.success_threshold = std::numeric_limits<double>::lowest();
    reset();
}

Observation CrafterEnv::reset() {
    state_ = world_.initial;
    step_count_ = 0;
    done_ = false;
    return observation();
}

Observation CrafterEnv::regenerate(std::uint64_t seed) {
    world_ = gen_crafter(world_.size(), seed);
    return reset();
}

Observation CrafterEnv::observation() const { return render_crafter_observation(state_); }

StepResult CrafterEnv::step(const ActionName& action) {
    if (done_) throw ProtocolViolation("step called on a finished crafter episode");
    const int index = crafter_action_index(action);
    CrafterOutcome out = crafter_apply(state_, index);
    ++step_count_;
    StepResult result{observation(), out.reward, out.terminal, false};
    if (!result.done && step_count_ >= spec_.max_steps) {
        result.done = true;
        result.truncated = true;
    }
    done_ = result.done;
    return result;
}

}  // namespace lwm

#include "lwm/envs/frozen_lake.hpp"

#include <queue>
#include <regex>
#include <sstream>

#include "lwm/errors.hpp"
#include "lwm/rng.hpp"

namespace lwm {

std::string_view lake_terrain_name(LakeTile tile) {
    switch (tile) {
        case LakeTile::Start: return "start";
        case LakeTile::Ice: return "ice";
        case LakeTile::Hole: return "hole";
        case LakeTile::Goal: return "goal";
    }
    return "ice";
}

FrozenLakeBoard::FrozenLakeBoard(int n, std::vector<LakeTile> tiles, double hole_density, std::uint64_t seed)
    : n_(n), tiles_(std::move(tiles)), hole_density_(hole_density), seed_(seed) {
    if (n < 2) throw InvalidArgument("frozen lake size must be >= 2");
    if (tiles_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
        throw InvalidArgument("frozen lake tile count does not match size");
    }
}

int FrozenLakeBoard::hole_count() const {
    int count = 0;
    for (auto t : tiles_) count += t == LakeTile::Hole;
    return count;
}

bool FrozenLakeBoard::solvable() const {
    if (n_ < 1 || at(start()) == LakeTile::Hole || at(goal()) == LakeTile::Hole) return false;
    std::vector<char> seen(tiles_.size(), 0);
    std::queue<GridPos> frontier;
    frontier.push(start());
    seen[index(start())] = 1;
    static constexpr int dr[] = {-1, 1, 0, 0};
    static constexpr int dc[] = {0, 0, -1, 1};
    while (!frontier.empty()) {
        GridPos p = frontier.front();
        frontier.pop();
        if (p == goal()) return true;
        for (int k = 0; k < 4; ++k) {
            GridPos q{p.row + dr[k], p.col + dc[k]};
            if (!in_bounds(q) || seen[index(q)] || at(q) == LakeTile::Hole) continue;
            seen[index(q)] = 1;
            frontier.push(q);
        }
    }
    return false;
}

void FrozenLakeBoard::validate() const {
    if (at(start()) != LakeTile::Start) throw InvalidArgument("board must have S at (0,0)");
    if (at(goal()) != LakeTile::Goal) throw InvalidArgument("board must have G at (n-1,n-1)");
    for (int r = 0; r < n_; ++r) {
        for (int c = 0; c < n_; ++c) {
            GridPos p{r, c};
            if (p == start() || p == goal()) continue;
            if (at(p) == LakeTile::Start || at(p) == LakeTile::Goal) {
                throw InvalidArgument("board has extra start or goal tile");
            }
        }
    }
    if (!solvable()) throw InvalidArgument("board has no path from start to goal");
}

std::string FrozenLakeBoard::to_text() const {
    std::string out;
    for (int r = 0; r < n_; ++r) {
        for (int c = 0; c < n_; ++c) {
            if (c) out += ' ';
            out += static_cast<char>(at({r, c}));
        }
        out += '\n';
    }
    return out;
}

FrozenLakeBoard FrozenLakeBoard::parse(std::string_view text) {
    std::vector<std::vector<LakeTile>> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream cells(line);
        std::string cell;
        std::vector<LakeTile> row;
        while (cells >> cell) {
            if (cell.size() != 1) throw InvalidArgument("bad board cell '" + cell + "'");
            switch (cell[0]) {
                case 'S': row.push_back(LakeTile::Start); break;
                case '.': row.push_back(LakeTile::Ice); break;
                case 'H': row.push_back(LakeTile::Hole); break;
                case 'G': row.push_back(LakeTile::Goal); break;
                default: throw InvalidArgument("bad board cell '" + cell + "'");
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    const int n = static_cast<int>(rows.size());
    if (n < 2) throw InvalidArgument("board fixture must have at least 2 rows");
    std::vector<LakeTile> tiles;
    int holes = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n) throw InvalidArgument("board fixture must be square");
        for (auto t : row) holes += t == LakeTile::Hole;
        tiles.insert(tiles.end(), row.begin(), row.end());
    }
    const int interior = n * n - 2;
    FrozenLakeBoard board(n, std::move(tiles), interior > 0 ? static_cast<double>(holes) / interior : 0.0, 0);
    board.validate();
    return board;
}

std::vector<GridPos> safe_corridor(int n) {
    std::vector<GridPos> path;
    GridPos p{0, 0};
    path.push_back(p);
    bool go_right = true;
    while (!(p.row == n - 1 && p.col == n - 1)) {
        if ((go_right && p.col < n - 1) || p.row == n - 1) {
            ++p.col;
        } else {
            ++p.row;
        }
        go_right = !go_right;
        path.push_back(p);
    }
    return path;
}

FrozenLakeBoard gen_frozen_lake(int n, double hole_density, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("frozen lake size must be >= 2");
    if (!(hole_density >= 0.0 && hole_density <= 1.0)) throw InvalidArgument("hole density must lie in [0,1]");
    const auto cells = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    std::vector<char> safe(cells, 0);
    for (GridPos p : safe_corridor(n)) safe[static_cast<std::size_t>(p.row * n + p.col)] = 1;

    std::vector<LakeTile> tiles(cells, LakeTile::Ice);
    SplitMix64 rng(seed);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const auto i = static_cast<std::size_t>(r * n + c);
            // One draw per cell keeps the stream aligned regardless of corridor shape.
            const double u = rng.uniform();
            if (!safe[i] && u < hole_density) tiles[i] = LakeTile::Hole;
        }
    }
    tiles.front() = LakeTile::Start;
    tiles.back() = LakeTile::Goal;
    return FrozenLakeBoard(n, std::move(tiles), hole_density, seed);
}

FrozenLakeBoard case_study_board() {
    return FrozenLakeBoard::parse("S . H H\nH . . H\nH H . .\nH H H G\n");
}

LakeMove frozen_lake_move(const FrozenLakeBoard& board, GridPos pos, std::string_view action) {
    GridPos next = pos;
    if (action == "up") {
        --next.row;
    } else if (action == "down") {
        ++next.row;
    } else if (action == "left") {
        --next.col;
    } else if (action == "right") {
        ++next.col;
    } else {
        throw InvalidArgument("unknown frozen lake action '" + std::string(action) + "'");
    }
    if (!board.in_bounds(next)) next = pos;
    switch (board.at(next)) {
        case LakeTile::Goal: return {next, 1.0, true};
        case LakeTile::Hole: return {next, -1.0, true};
        default: return {next, 0.0, false};
    }
}

std::string render_lake_observation(const FrozenLakeBoard& board, GridPos pos) {
    std::ostringstream out;
    out << "You are at (" << pos.row << ", " << pos.col << ") on " << lake_terrain_name(board.at(pos)) << ".";
    return out.str();
}

std::optional<ParsedLakeObservation> parse_lake_observation(std::string_view obs) {
    static const std::regex re(R"(^\s*You are at \(\s*(\d+)\s*,\s*(\d+)\s*\) on (start|ice|hole|goal)\.?\s*$)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(obs.begin(), obs.end(), m, re)) return std::nullopt;
    return ParsedLakeObservation{{std::stoi(m[1].str()), std::stoi(m[2].str())}, m[3].str()};
}

StepResult frozen_lake_step(const FrozenLakeBoard& board, GridPos& agent_pos, std::string_view action) {
    LakeMove mv = frozen_lake_move(board, agent_pos, action);
    agent_pos = mv.pos;
    return {render_lake_observation(board, mv.pos), mv.reward, mv.terminal, false};
}

std::string frozen_lake_description(int n, double hole_density) {
    const int max_steps = 8 * (n - 1);
    std::ostringstream out;
    out << "TextFrozenLake: navigate a " << n << "x" << n << " frozen lake grid.\n"
        << "Coordinates are (row, col) with rows growing downward and columns growing rightward, "
        << "both indexed from 0.\n"
        << "You start at (0, 0) (tile S) and the goal (tile G) is at (" << n - 1 << ", " << n - 1 << ").\n"
        << "Every other tile is either ice (.), which is safe, or a hole (H).\n"
        << "Hole density: " << format_number(hole_density)
        << " (probability that a tile off the guaranteed path is a hole).\n"
        << "A path to the goal is guaranteed to exist.\n"
        << "Rewards: +1.0 for reaching the goal, -1.0 for falling into a hole, 0.0 otherwise.\n"
        << "The episode ends on reaching the goal, falling into a hole, or after " << max_steps << " steps.\n"
        << "Moves that would leave the grid keep you in place.\n"
        << "Observations look like \"You are at (r, c) on <terrain>.\" where terrain is start, ice, hole or goal. "
        << "The map itself is never shown.\n"
        << "Allowed actions: up, down, left, right.";
    return out.str();
}

// ---------------------------------------------------------------------------

FrozenLakeEnv::FrozenLakeEnv(FrozenLakeBoard board) : board_(std::move(board)) {
    const int n = board_.size();
    spec_.name = "frozenlake";
    spec_.allowed_actions = frozen_lake_actions();
    spec_.description = frozen_lake_description(n, board_.hole_density());
    spec_.max_steps = 8 * (n - 1);
    spec_.success_threshold = 0.99;
    reset();
}

Observation FrozenLakeEnv::reset() {
    pos_ = board_.start();
    step_count_ = 0;
    done_ = false;
    return observation();
}

Observation FrozenLakeEnv::observation() const { return render_lake_observation(board_, pos_); }

StepResult FrozenLakeEnv::step(const ActionName& action) {
    if (done_) throw ProtocolViolation("step called on a finished frozen lake episode");
    if (!spec_.allows(action)) throw InvalidArgument("unknown frozen lake action '" + action + "'");
    StepResult result = frozen_lake_step(board_, pos_, action);
    ++step_count_;
    if (!result.done && step_count_ >= spec_.max_steps) {
        result.done = true;
        result.truncated = true;
    }
    done_ = result.done;
    return result;
}

}  // namespace lwm

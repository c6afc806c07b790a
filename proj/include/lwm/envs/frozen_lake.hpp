#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lwm/envs/environment.hpp"

namespace lwm {

struct GridPos {
    int row = 0;
    int col = 0;
    friend bool operator==(const GridPos&, const GridPos&) = default;
    friend auto operator<=>(const GridPos&, const GridPos&) = default;
};

enum class LakeTile : char { Start = 'S', Ice = '.', Hole = 'H', Goal = 'G' };

// "start", "ice", "hole", "goal"
std::string_view lake_terrain_name(LakeTile tile);

class FrozenLakeBoard {
public:
    FrozenLakeBoard() = default;
    FrozenLakeBoard(int n, std::vector<LakeTile> tiles, double hole_density = 0.0, std::uint64_t seed = 0);

    int size() const { return n_; }
    LakeTile at(GridPos p) const { return tiles_[index(p)]; }
    void set(GridPos p, LakeTile t) { tiles_[index(p)] = t; }
    bool in_bounds(GridPos p) const { return p.row >= 0 && p.col >= 0 && p.row < n_ && p.col < n_; }
    GridPos start() const { return {0, 0}; }
    GridPos goal() const { return {n_ - 1, n_ - 1}; }
    double hole_density() const { return hole_density_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<LakeTile>& tiles() const { return tiles_; }
    int hole_count() const;

    // BFS over non-hole tiles from start to goal.
    bool solvable() const;
    // Throws InvalidArgument unless start/goal placement and solvability hold.
    void validate() const;

    // Fixture format: one row per line, cells space separated from {S . H G}.
    std::string to_text() const;
    static FrozenLakeBoard parse(std::string_view text);

    friend bool operator==(const FrozenLakeBoard& a, const FrozenLakeBoard& b) {
        return a.n_ == b.n_ && a.tiles_ == b.tiles_;
    }

private:
    std::size_t index(GridPos p) const { return static_cast<std::size_t>(p.row * n_ + p.col); }

    int n_ = 0;
    std::vector<LakeTile> tiles_;
    double hole_density_ = 0.0;
    std::uint64_t seed_ = 0;
};

// Monotone right/down staircase (0,0),(0,1),(1,1),(1,2),...,(n-1,n-1).
std::vector<GridPos> safe_corridor(int n);

// Lays the safe corridor, then samples holes row-major with probability
// `hole_density` on every other non-start/goal cell. Throws for n < 2.
FrozenLakeBoard gen_frozen_lake(int n, double hole_density, std::uint64_t seed);

// The 4x4 board of the worked example: "S . H H / H . . H / H H . . / H H H G".
FrozenLakeBoard case_study_board();

inline const std::vector<ActionName>& frozen_lake_actions() {
    static const std::vector<ActionName> actions{"up", "down", "left", "right"};
    return actions;
}

// Applies one move. Off-grid moves keep the position. Returns the new
// position, reward (+1 goal, -1 hole, 0 otherwise) and whether the new
// tile is terminal. Throws InvalidArgument for unknown actions.
struct LakeMove {
    GridPos pos;
    double reward = 0.0;
    bool terminal = false;
};
LakeMove frozen_lake_move(const FrozenLakeBoard& board, GridPos pos, std::string_view action);

// "You are at (r, c) on <terrain>."
std::string render_lake_observation(const FrozenLakeBoard& board, GridPos pos);

struct ParsedLakeObservation {
    GridPos pos;
    std::string terrain;
};
std::optional<ParsedLakeObservation> parse_lake_observation(std::string_view obs);

// Single-step dynamics on a board (no step budget).
StepResult frozen_lake_step(const FrozenLakeBoard& board, GridPos& agent_pos, std::string_view action);

std::string frozen_lake_description(int n, double hole_density);

class FrozenLakeEnv final : public Environment {
public:
    explicit FrozenLakeEnv(FrozenLakeBoard board);

    const EnvSpec& spec() const override { return spec_; }
    Observation reset() override;
    StepResult step(const ActionName& action) override;
    Observation observation() const override;
    bool done() const override { return done_; }
    int step_count() const override { return step_count_; }

    const FrozenLakeBoard& board() const { return board_; }
    GridPos position() const { return pos_; }

private:
    FrozenLakeBoard board_;
    EnvSpec spec_;
    GridPos pos_{};
    int step_count_ = 0;
    bool done_ = false;
};

}  // namespace lwm

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lwm/envs/environment.hpp"
#include "lwm/envs/frozen_lake.hpp"

namespace lwm {

enum class CrafterTile : char { Grass = 'g', Tree = 't', Stone = 's', Iron = 'i', Water = 'w' };

// "grass", "tree", "stone", "iron", "water"
std::string_view crafter_tile_name(CrafterTile tile);
std::optional<CrafterTile> crafter_tile_from_name(std::string_view name);

enum CrafterAction : int {
    kNorth = 0,
    kSouth = 1,
    kEast = 2,
    kWest = 3,
    kCollect = 4,
    kCraftWoodPickaxe = 5,
    kCraftStonePickaxe = 6,
    kCraftIronPickaxe = 7,
};

inline const std::vector<ActionName>& crafter_actions() {
    static const std::vector<ActionName> actions{
        "north", "south", "east", "west", "collect", "craft_wood_pickaxe", "craft_stone_pickaxe", "craft_iron_pickaxe"};
    return actions;
}

// Accepts the action name or its integer ("0".."7"). Throws InvalidArgument.
int crafter_action_index(std::string_view action);

// Everything that changes while playing. The grid is part of it because
// collecting turns resource tiles into grass.
struct CrafterState {
    int n = 0;
    std::vector<CrafterTile> tiles;
    GridPos agent;
    int wood = 0;
    int stone = 0;
    int iron = 0;
    bool wood_pickaxe = false;
    bool stone_pickaxe = false;
    bool iron_pickaxe = false;

    CrafterTile at(GridPos p) const { return tiles[static_cast<std::size_t>(p.row * n + p.col)]; }
    void set(GridPos p, CrafterTile t) { tiles[static_cast<std::size_t>(p.row * n + p.col)] = t; }
    GridPos wrap(GridPos p) const { return {((p.row % n) + n) % n, ((p.col % n) + n) % n}; }
    int count(CrafterTile t) const;
    // Compact identity used for hashing in solvers.
    std::string key() const;

    friend bool operator==(const CrafterState&, const CrafterState&) = default;
};

struct CrafterWorld {
    CrafterState initial;
    std::uint64_t seed = 0;

    int size() const { return initial.n; }
    int max_steps() const { return 4 * initial.n * initial.n; }

    // Fixture format: "agent r c" header, then one row per line of g/t/s/i/w.
    std::string to_text() const;
    static CrafterWorld parse(std::string_view text);
};

// Tiles are drawn i.i.d. per cell, then topped up so at least one tree and
// three stone and three iron tiles exist (one of each when n*n < 8).
// The agent start cell is drawn from the same stream. Throws for n < 2.
CrafterWorld gen_crafter(int n, std::uint64_t seed);

struct CrafterOutcome {
    double reward = 0.0;
    bool terminal = false;
};

// One step of the dynamics without the step budget. Throws InvalidArgument
// for actions outside 0..7.
CrafterOutcome crafter_apply(CrafterState& state, int action);

std::string render_crafter_observation(const CrafterState& state);

struct ParsedCrafterObservation {
    CrafterTile here;
    GridPos pos;
    std::array<CrafterTile, 4> neighbors;  // north, south, east, west
    int wood = 0;
    int stone = 0;
    int iron = 0;
    bool wood_pickaxe = false;
    bool stone_pickaxe = false;
    bool iron_pickaxe = false;
};
std::optional<ParsedCrafterObservation> parse_crafter_observation(std::string_view obs);

std::string crafter_description(int n);

class CrafterEnv final : public Environment {
public:
    explicit CrafterEnv(CrafterWorld world);

    const EnvSpec& spec() const override { return spec_; }
    // Restores the blueprint world.
    Observation reset() override;
    StepResult step(const ActionName& action) override;
    Observation observation() const override;
    bool done() const override { return done_; }
    int step_count() const override { return step_count_; }

    // Replaces the blueprint with a freshly generated world and resets.
    Observation regenerate(std::uint64_t seed);

    const CrafterWorld& world() const { return world_; }
    const CrafterState& state() const { return state_; }

private:
    CrafterWorld world_;
    EnvSpec spec_;
    CrafterState state_;
    int step_count_ = 0;
    bool done_ = false;
};

}  // namespace lwm

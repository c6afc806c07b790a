#pragma once

#include <string>
#include <vector>

#include "lwm/core_types.hpp"

namespace lwm {

struct EnvSpec {
    std::string name;
    std::vector<ActionName> allowed_actions;
    // The env_description block injected into every prompt.
    std::string description;
    int max_steps = 0;
    // Episodes that end in a terminal state with total reward at or above this
    // threshold count as successes.
    double success_threshold = 0.99;

    bool allows(std::string_view action) const;
};

struct StepResult {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    // True when `done` was caused by the step limit, not a terminal state.
    bool truncated = false;
};

// Uniform episodic interface over the native environments. Instances are
// exclusively owned and single-threaded.
class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvSpec& spec() const = 0;
    virtual Observation reset() = 0;
    // Throws InvalidArgument for unknown actions and ProtocolViolation when
    // called after the episode is done.
    virtual StepResult step(const ActionName& action) = 0;
    virtual Observation observation() const = 0;
    virtual bool done() const = 0;
    virtual int step_count() const = 0;
};

// Shortest round-trip rendering of a double ("0.9", "1", "0.25").
std::string format_number(double value);

}  // namespace lwm

#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lwm {

// Environment-rendered state description. Non-empty, single line.
using Observation = std::string;
// Member of the active environment's action vocabulary.
using ActionName = std::string;
// One declarative statement about the environment, e.g. "(1,0) is a hole."
using AtomicFact = std::string;

// Trim plus collapse of internal whitespace runs to a single space.
// Case is preserved. Two facts are duplicates iff their canonical forms match.
std::string canonicalize_fact(std::string_view text);

// Shortest round-trip decimal with at least one fractional digit:
// 0 -> "0.0", -1 -> "-1.0", 0.25 -> "0.25".
std::string format_reward(double value);

// Bounded, ordered, de-duplicated fact store. Oldest facts are evicted first.
class FactMemory {
public:
    static constexpr std::size_t kDefaultCapacity = 200;

    FactMemory() : FactMemory(kDefaultCapacity) {}
    explicit FactMemory(std::size_t capacity);

    // Appends the canonical form of `fact` unless it is already present.
    // Facts that canonicalize to an empty string are rejected with a warning.
    // Returns true iff the memory changed.
    bool insert(std::string_view fact);

    // Replaces the contents with `facts` (canonicalized, de-duplicated,
    // capacity enforced by keeping the newest).
    void assign(const std::vector<std::string>& facts);

    bool contains(std::string_view fact) const;
    const std::deque<std::string>& items() const { return items_; }
    std::vector<std::string> to_vector() const { return {items_.begin(), items_.end()}; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    std::size_t capacity() const { return capacity_; }

    // Order-independent digest over the sorted canonical facts.
    std::string digest() const;

    friend bool operator==(const FactMemory& a, const FactMemory& b) {
        return a.capacity_ == b.capacity_ && a.items_ == b.items_;
    }

private:
    std::size_t capacity_;
    std::deque<std::string> items_;
};

// Value-style wrapper around FactMemory::insert.
FactMemory fact_memory_insert(FactMemory mem, std::string_view fact);

enum class HistoryKind { Obs, Act };

// "Obs: <text>" or "Act: <text>". Throws InvalidArgument on empty text.
std::string format_history_line(HistoryKind kind, std::string_view text);

// Bounded window of formatted history lines. Capacity counts lines.
class HistoryBuffer {
public:
    static constexpr std::size_t kDefaultCapacity = 51;

    HistoryBuffer() : HistoryBuffer(kDefaultCapacity) {}
    explicit HistoryBuffer(std::size_t capacity);

    void push(HistoryKind kind, std::string_view text);
    // Appends "Act: action" then "Obs: obs".
    void push_pair(std::string_view action, std::string_view obs);
    // Copy of this buffer extended by one (action, obs) pair.
    HistoryBuffer with_pair(std::string_view action, std::string_view obs) const;
    void clear() { lines_.clear(); }

    const std::deque<std::string>& lines() const { return lines_; }
    std::size_t size() const { return lines_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return lines_.empty(); }

    // Lines joined by '\n'.
    std::string joined() const;

    friend bool operator==(const HistoryBuffer& a, const HistoryBuffer& b) {
        return a.capacity_ == b.capacity_ && a.lines_ == b.lines_;
    }

private:
    void append_line(std::string line);

    std::size_t capacity_;
    std::deque<std::string> lines_;
};

HistoryBuffer history_push_pair(HistoryBuffer h, std::string_view action, std::string_view obs);

struct Transition {
    Observation obs;
    ActionName action;
    double reward = 0.0;
    Observation next_obs;
    bool done = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

// Transitions of one episode. total_reward is accumulated in insertion order.
class EpisodeBuffer {
public:
    void add(Transition t);
    const std::vector<Transition>& transitions() const { return transitions_; }
    double total_reward() const { return total_reward_; }
    std::size_t size() const { return transitions_.size(); }
    bool empty() const { return transitions_.empty(); }

    // Set when the episode ended by a step limit (environment or run budget)
    // rather than by reaching a terminal state.
    bool truncated() const { return truncated_; }
    void set_truncated(bool value) { truncated_ = value; }

    friend bool operator==(const EpisodeBuffer&, const EpisodeBuffer&) = default;

private:
    std::vector<Transition> transitions_;
    double total_reward_ = 0.0;
    bool truncated_ = false;
};

void to_json(nlohmann::json& j, const Transition& t);
void from_json(const nlohmann::json& j, Transition& t);
void to_json(nlohmann::json& j, const EpisodeBuffer& b);
void from_json(const nlohmann::json& j, EpisodeBuffer& b);

}  // namespace lwm

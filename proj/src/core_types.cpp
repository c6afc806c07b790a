#include "lwm/core_types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "lwm/digest.hpp"
#include "lwm/errors.hpp"
#include "lwm/log.hpp"

namespace lwm {

std::string canonicalize_fact(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::string format_reward(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    std::string s(buf, end);
    if (s.find_first_not_of("-0123456789") == std::string::npos) s += ".0";
    return s;
}

// ---------------------------------------------------------------------------
// FactMemory

FactMemory::FactMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InvalidArgument("fact memory capacity must be positive");
}

bool FactMemory::insert(std::string_view fact) {
    std::string canon = canonicalize_fact(fact);
    if (canon.empty()) {
        warn("rejected empty fact");
        return false;
    }
    if (std::find(items_.begin(), items_.end(), canon) != items_.end()) return false;
    items_.push_back(std::move(canon));
    while (items_.size() > capacity_) items_.pop_front();
    return true;
}

void FactMemory::assign(const std::vector<std::string>& facts) {
    items_.clear();
    for (const auto& f : facts) insert(f);
}

bool FactMemory::contains(std::string_view fact) const {
    const std::string canon = canonicalize_fact(fact);
    return std::find(items_.begin(), items_.end(), canon) != items_.end();
}

std::string FactMemory::digest() const {
    std::vector<std::string> sorted(items_.begin(), items_.end());
    std::sort(sorted.begin(), sorted.end());
    std::string joined;
    for (const auto& f : sorted) {
        joined += f;
        joined += '\n';
    }
    return sha256_hex(joined);
}

FactMemory fact_memory_insert(FactMemory mem, std::string_view fact) {
    mem.insert(fact);
    return mem;
}

// ---------------------------------------------------------------------------
// HistoryBuffer

std::string format_history_line(HistoryKind kind, std::string_view text) {
    if (text.empty()) throw InvalidArgument("history line text must be non-empty");
    std::string line = kind == HistoryKind::Obs ? "Obs: " : "Act: ";
    line.append(text);
    return line;
}

HistoryBuffer::HistoryBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InvalidArgument("history capacity must be positive");
}

void HistoryBuffer::append_line(std::string line) {
    lines_.push_back(std::move(line));
    while (lines_.size() > capacity_) lines_.pop_front();
}

void HistoryBuffer::push(HistoryKind kind, std::string_view text) {
    append_line(format_history_line(kind, text));
}

void HistoryBuffer::push_pair(std::string_view action, std::string_view obs) {
    push(HistoryKind::Act, action);
    push(HistoryKind::Obs, obs);
}

HistoryBuffer HistoryBuffer::with_pair(std::string_view action, std::string_view obs) const {
    HistoryBuffer copy = *this;
    copy.push_pair(action, obs);
    return copy;
}

std::string HistoryBuffer::joined() const {
    std::string out;
    for (std::size_t i = 0; i < lines_.size(); ++i) {
        if (i) out += '\n';
        out += lines_[i];
    }
    return out;
}

HistoryBuffer history_push_pair(HistoryBuffer h, std::string_view action, std::string_view obs) {
    h.push_pair(action, obs);
    return h;
}

// ---------------------------------------------------------------------------
// Episode records

void EpisodeBuffer::add(Transition t) {
    total_reward_ += t.reward;
    transitions_.push_back(std::move(t));
}

void to_json(nlohmann::json& j, const Transition& t) {
    j = nlohmann::json{{"obs", t.obs}, {"action", t.action}, {"reward", t.reward},
                       {"next_obs", t.next_obs}, {"done", t.done}};
}

void from_json(const nlohmann::json& j, Transition& t) {
    j.at("obs").get_to(t.obs);
    j.at("action").get_to(t.action);
    j.at("reward").get_to(t.reward);
    j.at("next_obs").get_to(t.next_obs);
    j.at("done").get_to(t.done);
}

void to_json(nlohmann::json& j, const EpisodeBuffer& b) {
    j = nlohmann::json{{"transitions", b.transitions()},
                       {"total_reward", b.total_reward()},
                       {"truncated", b.truncated()}};
}

void from_json(const nlohmann::json& j, EpisodeBuffer& b) {
    b = EpisodeBuffer{};
    for (const auto& t : j.at("transitions")) b.add(t.get<Transition>());
    b.set_truncated(j.value("truncated", false));
}

}  // namespace lwm

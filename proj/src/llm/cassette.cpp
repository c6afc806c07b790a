#include "lwm/llm/cassette.hpp"

#include <sstream>

#include "lwm/digest.hpp"
#include "lwm/envs/environment.hpp"
#include "lwm/errors.hpp"

namespace lwm {

std::string canonical_prompt(std::string_view prompt) {
    std::string out;
    out.reserve(prompt.size());
    std::string line;
    auto flush = [&](bool newline) {
        auto end = line.find_last_not_of(" \t\r");
        line.erase(end == std::string::npos ? 0 : end + 1);
        out += line;
        if (newline) out += '\n';
        line.clear();
    };
    for (char c : prompt) {
        if (c == '\n') {
            flush(true);
        } else {
            line += c;
        }
    }
    flush(false);
    auto end = out.find_last_not_of(" \t\r\n");
    out.erase(end == std::string::npos ? 0 : end + 1);
    return out;
}

std::string cassette_key(const LlmCall& call) {
    nlohmann::json id = nlohmann::json::array({call.function.name, canonical_prompt(call.user), format_number(call.temperature)});
    return sha256_hex(id.dump());
}

RecordingBackend::RecordingBackend(Backend& inner, const std::filesystem::path& file)
    : inner_(inner), out_(file, std::ios::app) {
    if (!out_) throw InvalidArgument("cannot open cassette file " + file.string());
}

LlmResult RecordingBackend::complete(const LlmCall& call) {
    LlmResult result = inner_.complete(call);
    const std::string key = cassette_key(call);
    std::lock_guard lock(mu_);
    if (written_.insert(key).second) {
        nlohmann::json line{{"key", key},
                            {"function", call.function.name},
                            {"prompt", canonical_prompt(call.user)},
                            {"result", result}};
        out_ << line.dump() << '\n';
        out_.flush();
    }
    return result;
}

std::size_t RecordingBackend::recorded() const {
    std::lock_guard lock(mu_);
    return written_.size();
}

ReplayBackend::ReplayBackend(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw InvalidArgument("cannot open cassette file " + file.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            Entry e{j.at("function").get<std::string>(), j.at("result").get<LlmResult>()};
            entries_.emplace(j.at("key").get<std::string>(), std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError("cassette " + file.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
}

LlmResult ReplayBackend::complete(const LlmCall& call) {
    const std::string key = cassette_key(call);
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end() || it->second.function != call.function.name) {
        ++misses_;
        throw MissingCassette("no recorded result for " + call.function.name + " call " + key.substr(0, 12));
    }
    ++hits_;
    return it->second.result;
}

std::size_t ReplayBackend::hits() const {
    std::lock_guard lock(mu_);
    return hits_;
}

std::size_t ReplayBackend::misses() const {
    std::lock_guard lock(mu_);
    return misses_;
}

}  // namespace lwm

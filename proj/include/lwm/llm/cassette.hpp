#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>

#include "lwm/llm/backend.hpp"

namespace lwm {

// CRLF -> LF and trailing whitespace stripped from every line and the end.
std::string canonical_prompt(std::string_view prompt);

// SHA-256 over (function name, canonical user prompt, temperature).
std::string cassette_key(const LlmCall& call);

// Appends every call that reaches the wrapped backend to a JSON-lines file:
// {"key", "function", "prompt", "result"}. A key is written once.
class RecordingBackend final : public Backend {
public:
    RecordingBackend(Backend& inner, const std::filesystem::path& file);

    LlmResult complete(const LlmCall& call) override;
    std::string name() const override { return "record(" + inner_.name() + ")"; }
    std::size_t recorded() const;

private:
    Backend& inner_;
    mutable std::mutex mu_;
    std::ofstream out_;
    std::set<std::string> written_;
};

// Serves recorded results; never talks to anything else. A miss raises
// MissingCassette.
class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(const std::filesystem::path& file);

    LlmResult complete(const LlmCall& call) override;
    std::string name() const override { return "replay"; }

    std::size_t size() const { return entries_.size(); }
    std::size_t hits() const;
    std::size_t misses() const;

private:
    struct Entry {
        std::string function;
        LlmResult result;
    };
    std::map<std::string, Entry> entries_;
    mutable std::mutex mu_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

}  // namespace lwm

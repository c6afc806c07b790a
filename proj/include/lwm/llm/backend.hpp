#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "lwm/llm/schema.hpp"

namespace lwm {

// One structured function call in, one schema-valid result out.
// Implementations must be safe to call from several threads.
class Backend {
public:
    virtual ~Backend() = default;
    virtual LlmResult complete(const LlmCall& call) = 0;
    virtual std::string name() const = 0;
};

// Dispatch with contract checks on both sides: the call must name a known
// function and the reply must match its schema (ContractError otherwise).
LlmResult complete(Backend& backend, const LlmCall& call);

// Adapts a callable. Handy for scripted replies in tests and tools.
class FunctionBackend final : public Backend {
public:
    using Fn = std::function<LlmResult(const LlmCall&)>;
    explicit FunctionBackend(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}
    LlmResult complete(const LlmCall& call) override { return fn_(call); }
    std::string name() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

// Counts invocations that reach the wrapped backend, per function name and
// per cassette key.
class CountingBackend final : public Backend {
public:
    explicit CountingBackend(Backend& inner) : inner_(inner) {}

    LlmResult complete(const LlmCall& call) override;
    std::string name() const override { return "counting(" + inner_.name() + ")"; }

    std::size_t total() const;
    std::size_t count(const std::string& function) const;
    // Number of distinct request keys seen so far.
    std::size_t distinct_keys() const;
    // Largest number of times any single key was sent.
    std::size_t max_repeats() const;
    void reset();

private:
    Backend& inner_;
    mutable std::mutex mu_;
    std::map<std::string, std::size_t> by_function_;
    std::map<std::string, std::size_t> by_key_;
    std::size_t total_ = 0;
};

}  // namespace lwm

#include "lwm/llm/backend.hpp"

#include <algorithm>

#include "lwm/errors.hpp"
#include "lwm/llm/cassette.hpp"

namespace lwm {

LlmResult complete(Backend& backend, const LlmCall& call) {
    const FunctionSchema& schema = function_schema(call.function.name);
    LlmResult result = backend.complete(call);
    schema.validate(result.arguments);
    if (result.arguments.at("thought").get<std::string>() != result.thought) {
        throw ContractError(schema.name + ": thought does not match arguments");
    }
    return result;
}

LlmResult CountingBackend::complete(const LlmCall& call) {
    {
        std::lock_guard lock(mu_);
        ++total_;
        ++by_function_[call.function.name];
        ++by_key_[cassette_key(call)];
    }
    return inner_.complete(call);
}

std::size_t CountingBackend::total() const {
    std::lock_guard lock(mu_);
    return total_;
}

std::size_t CountingBackend::count(const std::string& function) const {
    std::lock_guard lock(mu_);
    auto it = by_function_.find(function);
    return it == by_function_.end() ? 0 : it->second;
}

std::size_t CountingBackend::distinct_keys() const {
    std::lock_guard lock(mu_);
    return by_key_.size();
}

std::size_t CountingBackend::max_repeats() const {
    std::lock_guard lock(mu_);
    std::size_t m = 0;
    for (const auto& [_, n] : by_key_) m = std::max(m, n);
    return m;
}

void CountingBackend::reset() {
    std::lock_guard lock(mu_);
    by_function_.clear();
    by_key_.clear();
    total_ = 0;
}

}  // namespace lwm

#include "lwm/log.hpp"

#include <iostream>
#include <memory>
#include <mutex>

namespace lwm {
namespace {

std::mutex& handler_mutex() {
    static std::mutex m;
    return m;
}

WarningHandler& handler_slot() {
    static WarningHandler h = [](std::string_view msg) { std::clog << "[lwm] warning: " << msg << '\n'; };
    return h;
}

}  // namespace

void warn(std::string_view message) {
    WarningHandler h;
    {
        std::lock_guard lock(handler_mutex());
        h = handler_slot();
    }
    if (h) h(message);
}

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(handler_mutex());
    auto previous = std::move(handler_slot());
    handler_slot() = std::move(handler);
    return previous;
}

struct WarningCapture::State {
    mutable std::mutex mutex;
    std::vector<std::string> messages;
};

WarningCapture::WarningCapture() : state_(new State) {
    State* s = state_;
    previous_ = set_warning_handler([s](std::string_view msg) {
        std::lock_guard lock(s->mutex);
        s->messages.emplace_back(msg);
    });
}

WarningCapture::~WarningCapture() {
    set_warning_handler(std::move(previous_));
    delete state_;
}

std::vector<std::string> WarningCapture::messages() const {
    std::lock_guard lock(state_->mutex);
    return state_->messages;
}

bool WarningCapture::contains(std::string_view needle) const {
    std::lock_guard lock(state_->mutex);
    for (const auto& m : state_->messages) {
        if (m.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace lwm

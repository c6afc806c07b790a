#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace lwm {

using WarningHandler = std::function<void(std::string_view)>;

// Emits a warning through the installed handler (stderr by default).
// Thread-safe.
void warn(std::string_view message);

// Installs a process-wide handler and returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

// Collects warnings for the lifetime of the object; restores the previous
// handler on destruction. Intended for tests and the CLI's quiet mode.
class WarningCapture {
public:
    WarningCapture();
    ~WarningCapture();
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    std::vector<std::string> messages() const;
    bool contains(std::string_view needle) const;

private:
    struct State;
    State* state_;
    WarningHandler previous_;
};

}  // namespace lwm

#include "lwm/envs/environment.hpp"

#include <algorithm>
#include <charconv>

namespace lwm {

bool EnvSpec::allows(std::string_view action) const {
    return std::find(allowed_actions.begin(), allowed_actions.end(), action) != allowed_actions.end();
}

std::string format_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

}  // namespace lwm

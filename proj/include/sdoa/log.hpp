#pragma once

#include <string_view>

namespace sdoa {

// Warnings go to stderr unless silenced (tests and Monte-Carlo sweeps silence them).
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);

} // namespace sdoa

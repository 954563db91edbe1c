#include "sdoa/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace sdoa {

namespace {
std::atomic<bool> g_enabled{true};
std::mutex g_mutex;
} // namespace

void warn(std::string_view message)
{
    if (!g_enabled.load(std::memory_order_relaxed))
        return;
    std::lock_guard lock(g_mutex);
    std::clog << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_enabled.store(enabled); }

} // namespace sdoa

#include "nplsa/errors.hpp"

#include <atomic>
#include <iostream>

namespace nplsa {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}

void warn(const std::string& message) {
    if (g_warnings_enabled.load(std::memory_order_relaxed)) {
        std::cerr << "warning: " << message << '\n';
    }
}

void set_warnings_enabled(bool enabled) { g_warnings_enabled.store(enabled, std::memory_order_relaxed); }

}  // namespace nplsa

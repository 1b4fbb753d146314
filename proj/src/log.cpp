#include "morphprof/log.hpp"

#include <cstdio>
#include <mutex>

namespace morphprof {

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

WarningSink& sink() {
    static WarningSink s = [](const std::string& msg) { std::fprintf(stderr, "warning: %s\n", msg.c_str()); };
    return s;
}

}  // namespace

WarningSink set_warning_sink(WarningSink next) {
    std::lock_guard lock(sink_mutex());
    std::swap(sink(), next);
    return next;
}

void warn(const std::string& message) {
    std::lock_guard lock(sink_mutex());
    if (sink()) sink()(message);
}

}  // namespace morphprof

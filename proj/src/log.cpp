#include "govdisc/log.hpp"

#include <iostream>
#include <mutex>

namespace govdisc::log {

namespace {
std::mutex g_mutex;
Sink& sink() {
    static Sink s = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
    return s;
}
} // namespace

void warn(const std::string& message) {
    std::lock_guard lock(g_mutex);
    if (sink()) sink()(message);
}

Sink set_sink(Sink s) {
    std::lock_guard lock(g_mutex);
    Sink old = std::move(sink());
    sink() = std::move(s);
    return old;
}

} // namespace govdisc::log

#pragma once

#include <functional>
#include <string>

namespace govdisc::log {

using Sink = std::function<void(const std::string&)>;

/// Non-fatal diagnostics (ignored columns, masked segments, ...). Defaults to
/// stderr; tests install their own sink.
void warn(const std::string& message);

/// Replaces the warning sink and returns the previous one.
Sink set_sink(Sink sink);

} // namespace govdisc::log

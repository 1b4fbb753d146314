#pragma once

#include <functional>
#include <string>

namespace morphprof {

using WarningSink = std::function<void(const std::string&)>;

/// Replaces the warning handler (default: one line on stderr). Pass an empty
/// function to silence warnings. Returns the previous handler.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace morphprof

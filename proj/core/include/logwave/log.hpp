#pragma once

#include <functional>
#include <string_view>

namespace logwave {

using WarningSink = std::function<void(std::string_view)>;

/// Route library warnings somewhere other than stderr. Passing an empty
/// function silences them. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

}  // namespace logwave

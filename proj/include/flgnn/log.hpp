#pragma once

#include <functional>
#include <string>

namespace flgnn {

using WarningSink = std::function<void(const std::string&)>;

// Reports a recoverable problem (e.g. a training split missing a class).
// Goes to stderr unless a sink has been installed.
void warn(const std::string& message);

// Installs `sink` and returns the previous one; pass nullptr for stderr.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace flgnn

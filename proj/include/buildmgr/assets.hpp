#pragma once

#include <string_view>

namespace buildmgr {

// Built-in static assets, used unless an assets directory provides its own.
std::string_view builtin_stylesheet();
std::string_view builtin_client_script();

}  // namespace buildmgr

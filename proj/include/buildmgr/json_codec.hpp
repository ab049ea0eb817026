#pragma once

#include <json.hpp>
#include <string>

#include "buildmgr/core_model.hpp"

namespace buildmgr {

// Revisions as text: "rev:<hash>", "synced:<id>" or "tip".
std::string revision_to_text(const Revision& rev);
Revision revision_from_text(const std::string& text);

nlohmann::json config_to_json(const BuildConfig& config);
// Throws Error(InvalidArgument) on structural problems.
BuildConfig config_from_json(const nlohmann::json& j);

nlohmann::json host_to_json(const Host& host);
Host host_from_json(const nlohmann::json& j);

}  // namespace buildmgr

#pragma once

// Figure presets shipped as config files under configs/presets and embedded
// at build time.

#include "optoent/run_config.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace optoent {

std::vector<std::string> preset_names();

std::optional<std::string_view> preset_text(std::string_view name);

// Throws ConfigError keyed "preset" for unknown names.
RunConfig load_preset(std::string_view name, RunConfig base = {});

}  // namespace optoent

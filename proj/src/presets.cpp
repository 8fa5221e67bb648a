#include "optoent/presets.hpp"

#include "optoent/presets_generated.hpp"

#include <fmt/format.h>

namespace optoent {

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : detail::kEmbeddedPresets) out.emplace_back(name);
  return out;
}

std::optional<std::string_view> preset_text(std::string_view name) {
  for (const auto& [key, text] : detail::kEmbeddedPresets) {
    if (key == name) return text;
  }
  return std::nullopt;
}

RunConfig load_preset(std::string_view name, RunConfig base) {
  const auto text = preset_text(name);
  if (!text) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("preset", fmt::format("unknown preset '{}' (known: {})", name, known));
  }
  return parse_config(*text, std::move(base));
}

}  // namespace optoent

#pragma once

#include <span>
#include <string_view>

namespace stlmpc {

struct EmbeddedPreset {
  std::string_view name;
  std::string_view text;
};

// Scenario files from presets/, compiled in.
std::span<const EmbeddedPreset> embedded_presets();

}  // namespace stlmpc

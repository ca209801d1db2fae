#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace quack {

// Bundled asset files (default map, prompt templates), embedded at build time.
// Names are paths relative to the assets/ directory, e.g. "maps/default.json".
// Throws ConfigError for unknown names.
std::string_view bundled_asset(std::string_view name);

// Replaces every `{key}` placeholder whose key appears in `vars`; other brace
// groups (JSON examples inside prompts) are left untouched.
std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string, std::string>>& vars);

}  // namespace quack

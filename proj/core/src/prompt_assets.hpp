#pragma once

#include <map>
#include <string>

namespace onset::assets {

/// Prompt templates keyed by asset file stem.
const std::map<std::string, std::string, std::less<>>& prompt_texts();

}  // namespace onset::assets

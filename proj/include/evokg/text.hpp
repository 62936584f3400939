#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace evokg::text {

// Lowercase, strip punctuation, collapse runs of whitespace.
std::string normalize(std::string_view s);

// Lowercase tokens split on non-alphanumeric characters.
std::vector<std::string> tokenize(std::string_view s);

}  // namespace evokg::text

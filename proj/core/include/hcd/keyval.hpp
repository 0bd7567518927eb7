#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hcd {

/// Ordered key=value entries from the project's config dialect:
/// one `key=value` per line, `#` starts a comment, blank lines ignored.
/// Order is preserved because scene specs use repeated group prefixes.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_keyvalues(const std::filesystem::path& path);
KeyValues parse_keyvalues_text(const std::string& text);

std::vector<double> parse_double_list(const std::string& s);
std::vector<int> parse_int_list(const std::string& s);
bool parse_bool(const std::string& s);

}  // namespace hcd

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace esn {

/// Shipped rule sets, queries and policies compiled into the binary, keyed by
/// path relative to the source tree (e.g. "stdlib/geometry.esn").
const std::map<std::string, std::string_view>& embedded_files();

/// Embedded text for `rel`, if shipped.
std::optional<std::string_view> embedded_file(const std::string& rel);

/// Reads a file from disk. Throws Error naming the path if it cannot be read.
std::string read_file(const std::string& path);

} // namespace esn

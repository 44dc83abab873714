#include "esn/resources.hpp"

#include "esn/error.hpp"

#include <fstream>
#include <sstream>

namespace esn {

std::optional<std::string_view> embedded_file(const std::string& rel) {
    const auto& files = embedded_files();
    auto it = files.find(rel);
    if (it == files.end()) return std::nullopt;
    return it->second;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace esn

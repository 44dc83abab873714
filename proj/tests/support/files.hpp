#pragma once

#include <fstream>
#include <sstream>
#include <string>

namespace esn::testing {

inline std::string source_path(const std::string& rel) { return std::string(ESN_SOURCE_DIR) + "/" + rel; }

inline std::string read_text_abs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string read_text(const std::string& rel) {
    std::ifstream in(source_path(rel), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace esn::testing

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "chrism/engine.hpp"
#include "chrism/parser.hpp"
#include "chrism/registry.hpp"

namespace test_helpers {

inline std::string fixture_path(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name), std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline chrism::Program load_program(const std::string& name) {
    return chrism::parse_program(read_fixture(name));
}

}  // namespace test_helpers

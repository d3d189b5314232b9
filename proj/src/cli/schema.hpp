#pragma once

#include <string>
#include <vector>

namespace sgs::cli {

struct KeySpec {
    std::string name;
    std::string fallback;  ///< empty: no default
};

const std::vector<KeySpec>& schema();
const std::vector<std::string>& experiments();
std::vector<std::string> sections_for(const std::string& experiment);

[[noreturn]] void config_error(const std::string& key, const std::string& what);

}  // namespace sgs::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sgs/common.hpp"

namespace sgs::cli {

inline constexpr const char* kVersion = SGS_VERSION;

/**
 * Flat key = value experiment description.
 *
 * Lines are `key = value`; `#` starts a comment; blank lines are ignored.
 * Keys are dotted (`grid.n`, `kernel.kind`, ...). Unknown keys, duplicate
 * keys and malformed values raise ConfigError naming the key.
 */
class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "<config>");
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return explicit_.count(key) != 0; }

    std::string text(const std::string& key) const;
    double real(const std::string& key) const;
    long long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    Vec3 vec3(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;

    /// Every key relevant to the experiment with its effective value.
    std::map<std::string, std::string> resolved() const;

    const std::string& experiment() const { return experiment_; }

private:
    std::string raw(const std::string& key) const;

    std::map<std::string, std::string> explicit_;
    std::string experiment_;
};

/// Dry run: parses values and checks every invariant that can be checked
/// without computation. Throws ConfigError naming the offending key.
void validate(const Config& cfg);

struct Product {
    std::string path;  ///< relative to the output directory
    std::uintmax_t bytes = 0;
    std::uint64_t checksum = 0;
};

struct RunReport {
    std::filesystem::path output_dir;
    std::vector<Product> products;  ///< numerical outputs, manifest excluded
};

/**
 * Validates, runs the experiment into a scratch directory next to `out`
 * (or output.dir when `out` is empty) and renames it into place on success.
 * On failure the scratch directory is removed. An existing non-empty output
 * directory is an IoError unless `overwrite` is set.
 */
RunReport run(const Config& cfg, const std::filesystem::path& out = {}, bool overwrite = false);

/// 0 ok, 2 config, 3 numerical, 4 I/O.
int exit_code(ErrorCode code);

}  // namespace sgs::cli

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "schema.hpp"
#include "sgs/cli.hpp"

namespace sgs::cli {

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> keys = {
        {"experiment", ""},
        {"seed", ""},
        {"output.dir", "sgs-out"},

        {"grid.n", "64"},
        {"grid.box", "56"},

        {"kernel.kind", "coulomb"},
        {"kernel.coupling", "1"},
        {"kernel.screening_length", "0"},
        {"kernel.boundary", "periodic"},

        {"solver.norm", "1"},
        {"solver.tol", "1e-8"},
        {"solver.max_iterations", "20000"},
        {"solver.scaling_norms", ""},

        {"evolve.initial", "ground-state"},
        {"evolve.width", "1"},
        {"evolve.centre", "0,0,0"},
        {"evolve.momentum", "0,0,0"},
        {"evolve.dt", "0.05"},
        {"evolve.t_end", "1"},
        {"evolve.periods", "0"},
        {"evolve.stride", "10"},
        {"evolve.linear", "false"},
        {"evolve.direction", "forward"},
        {"evolve.dump_snapshots", "false"},

        {"potential.kind", "none"},
        {"potential.value", "0"},
        {"potential.gradient", "0,0,0"},
        {"potential.omega", "1"},
        {"potential.centre", "0,0,0"},

        {"dbb.pilot", "two-gaussian"},
        {"dbb.particles", "10000"},
        {"dbb.bins", "20"},
        {"dbb.axis", "0"},
        {"dbb.separation", "6"},
        {"dbb.width", "1"},
        {"dbb.amplitude_ratio", "0.7"},
        {"dbb.momentum", "0,0,0"},
        {"dbb.trajectories", "4"},

        {"gravity.sources", ""},
        {"gravity.sigma", "1"},
        {"gravity.r_min", "0"},
        {"gravity.r_max", "0"},
        {"gravity.masses", ""},
        {"gravity.coupling_strength", "0"},
        {"gravity.coupling_order", "2"},
        {"gravity.calibrate_mass", "0"},

        {"droplet.mode", "zones"},
        {"droplet.f0", "2"},
        {"droplet.v", "1"},
        {"droplet.M_A", "1"},
        {"droplet.M_B", "1"},
        {"droplet.L_A", "0.01"},
        {"droplet.L_B", "0.01"},
        {"droplet.r_max", "5"},
        {"droplet.speed", "0.1"},
        {"droplet.b_min", "0.3"},
        {"droplet.b_max", "3"},
        {"droplet.b_count", "28"},
        {"droplet.revolutions", "20"},
        {"droplet.dt", "0.001"},
        {"droplet.separation", "1"},
        {"droplet.t_end", "100"},
        {"droplet.record_stride", "100"},
    };
    return keys;
}

const std::vector<std::string>& experiments() {
    static const std::vector<std::string> kinds = {"ground-state", "evolve", "dbb-ensemble", "effective-gravity",
                                                   "droplet"};
    return kinds;
}

std::vector<std::string> sections_for(const std::string& experiment) {
    if (experiment == "ground-state") return {"grid", "kernel", "solver"};
    if (experiment == "evolve") return {"grid", "kernel", "solver", "evolve", "potential"};
    if (experiment == "dbb-ensemble") return {"grid", "evolve", "dbb"};
    if (experiment == "effective-gravity") return {"grid", "gravity"};
    if (experiment == "droplet") return {"droplet"};
    return {};
}

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
    fail(ErrorCode::ConfigError, key + ": " + what);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const KeySpec* find_key(const std::string& key) {
    for (const auto& k : schema())
        if (k.name == key) return &k;
    return nullptr;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(v))
        config_error(key, "expected a finite number, got '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
    Config cfg;
    std::stringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(number);
        if (eq == std::string::npos) fail(ErrorCode::ConfigError, where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!find_key(key)) fail(ErrorCode::ConfigError, where + ": unknown key '" + key + "'");
        if (value.empty()) fail(ErrorCode::ConfigError, where + ": empty value for '" + key + "'");
        if (!cfg.explicit_.emplace(key, value).second)
            fail(ErrorCode::ConfigError, where + ": duplicate key '" + key + "'");
    }
    if (!cfg.explicit_.count("experiment")) config_error("experiment", "missing (one of ground-state, evolve, "
                                                                       "dbb-ensemble, effective-gravity, droplet)");
    cfg.experiment_ = cfg.explicit_.at("experiment");
    const auto& kinds = experiments();
    if (std::find(kinds.begin(), kinds.end(), cfg.experiment_) == kinds.end())
        config_error("experiment", "unknown experiment '" + cfg.experiment_ + "'");
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

std::string Config::raw(const std::string& key) const {
    const KeySpec* spec = find_key(key);
    require(spec != nullptr, "internal: unknown config key " + key);
    const auto it = explicit_.find(key);
    return it != explicit_.end() ? it->second : spec->fallback;
}

std::string Config::text(const std::string& key) const {
    std::string v = raw(key);
    if (v.empty()) config_error(key, "required");
    return v;
}

double Config::real(const std::string& key) const { return parse_double(key, text(key)); }

long long Config::integer(const std::string& key) const {
    const std::string t = text(key);
    long long v = 0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size()) config_error(key, "expected an integer, got '" + t + "'");
    return v;
}

bool Config::flag(const std::string& key) const {
    const std::string t = text(key);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    config_error(key, "expected true or false, got '" + t + "'");
}

Vec3 Config::vec3(const std::string& key) const {
    const auto parts = split(text(key), ',');
    if (parts.size() != 3) config_error(key, "expected three comma-separated numbers");
    return {parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])};
}

std::vector<double> Config::list(const std::string& key) const {
    std::vector<double> out;
    const std::string t = raw(key);
    if (t.empty()) return out;
    for (const auto& p : split(t, ',')) out.push_back(parse_double(key, p));
    return out;
}

std::map<std::string, std::string> Config::resolved() const {
    std::map<std::string, std::string> out;
    const auto sections = sections_for(experiment_);
    for (const auto& k : schema()) {
        const auto dot = k.name.find('.');
        const std::string section = dot == std::string::npos ? "" : k.name.substr(0, dot);
        const bool relevant = section.empty() || section == "output" ||
                              std::find(sections.begin(), sections.end(), section) != sections.end();
        if (relevant || explicit_.count(k.name)) out[k.name] = raw(k.name);
    }
    return out;
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError: return 2;
        case ErrorCode::IoError: return 4;
        default: return 3;
    }
}

}  // namespace sgs::cli

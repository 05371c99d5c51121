#include "sdegbm/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "sdegbm/errors.hpp"

namespace sdegbm {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    KeyValueConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.find('=') == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " of " + path + " is not key=value");
        cfg.set_line(line);
    }
    return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

void KeyValueConfig::set_line(const std::string& line) {
    const auto eq = line.find('=');
    if (eq == std::string::npos)
        throw ConfigError("config: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key in '" + line + "'");
    entries_[key] = value;
}

void KeyValueConfig::merge(const KeyValueConfig& overrides) {
    for (const auto& [k, v] : overrides.entries_) entries_[k] = v;
}

bool KeyValueConfig::has(const std::string& key) const {
    return entries_.count(key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw ConfigError("config: " + key + " is not a number: " + it->second);
    return v;
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    char* end = nullptr;
    const long v = std::strtol(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw ConfigError("config: " + key + " is not an integer: " + it->second);
    return v;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw ConfigError("config: " + key + " is not an integer: " + it->second);
    return v;
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    std::vector<std::string> out;
    auto it = entries_.find(key);
    if (it == entries_.end()) return out;
    std::string item;
    for (char c : it->second + ",") {
        if (c == ',') {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else {
            item += c;
        }
    }
    return out;
}

void KeyValueConfig::require_known_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : entries_) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("config: unknown key " + key);
    }
}

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "model.name",   "model.sigma",  "model.lambda", "model.mu",
        "model.k",      "model.alpha",  "model.c",      "model.gamma",
        "model.beta",   "model.delta",  "model.k1",     "model.k2",
        "model.sigma1", "model.sigma2", "model.sigma3", "model.epsilon",
        "run.T",        "run.M",        "run.groups",   "run.seed",
        "run.N_fine",   "run.dt_factors", "run.schemes", "run.reference",
        "run.error_at", "adaptive.h_max", "adaptive.rho", "projected.kappa",
        "spde.d",       "spde.grid_size",
    };
    return keys;
}

}  // namespace sdegbm

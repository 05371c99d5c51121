#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sdegbm {

// Flat key=value configuration: one assignment per line, '#' comments,
// dotted namespaces (model.*, run.*, adaptive.*, projected.*, spde.*).
// Later assignments override earlier ones, so inline CLI overrides are
// applied after the file.
class KeyValueConfig {
public:
    static KeyValueConfig from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void set_line(const std::string& line);  // parses "key=value"
    void merge(const KeyValueConfig& overrides);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;  // comma split

    // Rejects any key outside `allowed`, naming the offender.
    void require_known_keys(const std::vector<std::string>& allowed) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

// Full key inventory understood by the CLI.
const std::vector<std::string>& known_config_keys();

}  // namespace sdegbm

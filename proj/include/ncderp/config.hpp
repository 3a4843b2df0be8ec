#pragma once

// Flat key/value configuration files (a TOML subset): `key = value` lines,
// `#` comments, `[section]` headers prefixing keys with "section.", values
// that are integers, reals, booleans, "strings" or [lists] of those.

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace ncderp {

using ConfigScalar = std::variant<bool, long long, double, std::string>;
using ConfigValue = std::variant<ConfigScalar, std::vector<ConfigScalar>>;

class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text, const std::string& origin = "config");
    static KeyValueConfig read(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.contains(key); }
    std::vector<std::string> keys() const;

    long long get_int(const std::string& key, long long fallback) const;
    double get_real(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<std::string> get_strings(const std::string& key) const;
    std::vector<double> get_reals(const std::string& key) const;

    /// Throws Error naming the first key not in `known`.
    void reject_unknown(const std::vector<std::string>& known) const;

    const std::string& origin() const { return origin_; }

private:
    const ConfigValue& at(const std::string& key) const;
    std::map<std::string, ConfigValue> values_;
    std::string origin_;
};

}  // namespace ncderp

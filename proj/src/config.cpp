#include "ncderp/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ncderp/error.hpp"

namespace ncderp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

ConfigScalar parse_scalar(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    if (s.empty()) throw FormatError(where, "missing value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw FormatError(where, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '\\' && i + 2 < s.size()) {
                const char n = s[++i];
                out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
            } else {
                out += s[i];
            }
        }
        return out;
    }
    if (s == "true") return true;
    if (s == "false") return false;
    std::string digits = s;
    digits.erase(std::remove(digits.begin(), digits.end(), '_'), digits.end());
    try {
        std::size_t used = 0;
        if (digits.find_first_of(".eE") == std::string::npos || digits.rfind("0x", 0) == 0) {
            const long long v = std::stoll(digits, &used, 0);
            if (used == digits.size()) return v;
        }
        const double d = std::stod(digits, &used);
        if (used == digits.size()) return d;
    } catch (const std::exception&) {
    }
    throw FormatError(where, "cannot parse value '" + s + "' (strings need double quotes)");
}

std::vector<std::string> split_list(const std::string& body, const std::string& where) {
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (c == ',' && !in_string) {
            items.push_back(cur);
            cur.clear();
            continue;
        }
        cur += c;
    }
    if (in_string) throw FormatError(where, "unterminated string in list");
    if (!trim(cur).empty()) items.push_back(cur);
    return items;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    std::string pending_key, pending_value;
    std::size_t pending_line = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        line = trim(strip_comment(line));
        if (!pending_key.empty()) {
            pending_value += " " + line;
            if (line.find(']') == std::string::npos) continue;
            line = pending_key + " = " + pending_value;
            pending_key.clear();
        }
        if (line.empty()) continue;
        if (line.front() == '[' && line.find('=') == std::string::npos) {
            if (line.back() != ']') throw FormatError(where, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError(where, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw FormatError(where, "empty key");
        if (!section.empty()) key = section + "." + key;
        const std::string value = trim(line.substr(eq + 1));
        if (!value.empty() && value.front() == '[' && value.find(']') == std::string::npos) {
            pending_key = key;
            pending_value = value;
            pending_line = line_no;
            continue;
        }
        if (cfg.values_.contains(key)) throw FormatError(where, "duplicate key '" + key + "'");
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') throw FormatError(where, "malformed list");
            std::vector<ConfigScalar> items;
            for (const auto& item : split_list(value.substr(1, value.size() - 2), where))
                items.push_back(parse_scalar(item, where));
            cfg.values_[key] = items;
        } else {
            cfg.values_[key] = parse_scalar(value, where);
        }
    }
    if (!pending_key.empty())
        throw FormatError(origin + ":" + std::to_string(pending_line), "unterminated list");
    return cfg;
}

KeyValueConfig KeyValueConfig::read(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open config " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse(buf.str(), path.string());
}

std::vector<std::string> KeyValueConfig::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

const ConfigValue& KeyValueConfig::at(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw Error(origin_ + ": missing key '" + key + "'");
    return it->second;
}

namespace {

const ConfigScalar& scalar_of(const ConfigValue& v, const std::string& origin, const std::string& key) {
    if (const auto* s = std::get_if<ConfigScalar>(&v)) return *s;
    throw Error(origin + ": key '" + key + "' must be a single value, not a list");
}

}  // namespace

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const auto& s = scalar_of(at(key), origin_, key);
    if (const auto* v = std::get_if<long long>(&s)) return *v;
    throw Error(origin_ + ": key '" + key + "' must be an integer");
}

double KeyValueConfig::get_real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& s = scalar_of(at(key), origin_, key);
    if (const auto* v = std::get_if<double>(&s)) return *v;
    if (const auto* v = std::get_if<long long>(&s)) return static_cast<double>(*v);
    throw Error(origin_ + ": key '" + key + "' must be a number");
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& s = scalar_of(at(key), origin_, key);
    if (const auto* v = std::get_if<bool>(&s)) return *v;
    throw Error(origin_ + ": key '" + key + "' must be true or false");
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& s = scalar_of(at(key), origin_, key);
    if (const auto* v = std::get_if<std::string>(&s)) return *v;
    throw Error(origin_ + ": key '" + key + "' must be a quoted string");
}

std::vector<std::string> KeyValueConfig::get_strings(const std::string& key) const {
    if (!has(key)) return {};
    const auto* list = std::get_if<std::vector<ConfigScalar>>(&at(key));
    if (!list) throw Error(origin_ + ": key '" + key + "' must be a list");
    std::vector<std::string> out;
    for (const auto& item : *list) {
        const auto* v = std::get_if<std::string>(&item);
        if (!v) throw Error(origin_ + ": key '" + key + "' must list quoted strings");
        out.push_back(*v);
    }
    return out;
}

std::vector<double> KeyValueConfig::get_reals(const std::string& key) const {
    if (!has(key)) return {};
    const auto* list = std::get_if<std::vector<ConfigScalar>>(&at(key));
    if (!list) throw Error(origin_ + ": key '" + key + "' must be a list");
    std::vector<double> out;
    for (const auto& item : *list) {
        if (const auto* d = std::get_if<double>(&item)) out.push_back(*d);
        else if (const auto* i = std::get_if<long long>(&item)) out.push_back(static_cast<double>(*i));
        else throw Error(origin_ + ": key '" + key + "' must list numbers");
    }
    return out;
}

void KeyValueConfig::reject_unknown(const std::vector<std::string>& known) const {
    for (const auto& [k, v] : values_)
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw Error(origin_ + ": unknown key '" + k + "'");
}

}  // namespace ncderp

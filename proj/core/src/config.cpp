#include "fairboost/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fairboost/errors.hpp"

namespace fairboost {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("io", "cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("syntax", origin + ":" + std::to_string(lineno) +
                                                ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("syntax", origin + ":" + std::to_string(lineno) +
                                                ": empty section name");
            cfg.data_[section];  // register even if empty
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("syntax", origin + ":" + std::to_string(lineno) +
                                            ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("syntax", origin + ":" + std::to_string(lineno) + ": empty key");
        cfg.data_[section][key] = value;
    }
    return cfg;
}

bool Config::has_section(const std::string& section) const { return data_.count(section) > 0; }

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = data_.find(section);
    return it != data_.end() && it->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
    auto it = data_.find(section);
    if (it != data_.end()) {
        auto kv = it->second.find(key);
        if (kv != it->second.end()) return kv->second;
    }
    throw ConfigError("missing", origin_ + ": missing key '" + key + "' in section [" + section + "]");
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double Config::number(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    char* end = nullptr;
    double out = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("type", origin_ + ": [" + section + "] " + key + " = '" + v +
                                      "' is not a number");
    return out;
}

double Config::number_or(const std::string& section, const std::string& key,
                         double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
}

long Config::integer_or(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    double v = number(section, key);
    auto l = static_cast<long>(v);
    if (static_cast<double>(l) != v)
        throw ConfigError("type", origin_ + ": [" + section + "] " + key + " must be an integer");
    return l;
}

bool Config::flag_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("type", origin_ + ": [" + section + "] " + key + " = '" + v +
                                  "' is not a boolean");
}

std::vector<std::string> Config::list(const std::string& section, const std::string& key) const {
    std::vector<std::string> out;
    if (!has(section, key)) return out;
    std::istringstream in(get(section, key));
    std::string item;
    while (std::getline(in, item, ',')) {
        std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<std::string> Config::sections() const {
    std::vector<std::string> out;
    out.reserve(data_.size());
    for (const auto& [name, _] : data_) out.push_back(name);
    return out;
}

}  // namespace fairboost

#pragma once

#include <map>
#include <string>
#include <vector>

namespace fairboost {

/// INI-style configuration: `[section]` headers, `key = value` entries,
/// `#` or `;` comments, blank lines ignored.  Values are plain strings;
/// lists are comma separated.  A repeated key inside a section keeps the
/// last value.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    /// Throws ConfigError when the key is absent.
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

    double number(const std::string& section, const std::string& key) const;
    double number_or(const std::string& section, const std::string& key, double fallback) const;
    long integer_or(const std::string& section, const std::string& key, long fallback) const;
    bool flag_or(const std::string& section, const std::string& key, bool fallback) const;

    /// Comma-separated list, trimmed; empty when the key is absent.
    std::vector<std::string> list(const std::string& section, const std::string& key) const;

    std::vector<std::string> sections() const;

private:
    // section -> key -> value; ordered for deterministic iteration
    std::map<std::string, std::map<std::string, std::string>> data_;
    std::string origin_;
};

}  // namespace fairboost

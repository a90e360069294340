#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace govdisc {

/// Sectioned key/value text: `[section]` headers, `key = value` lines and
/// `#` comments. Keys outside any section live in section "". Order of keys
/// within a section is preserved.
class KvConfig {
public:
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
    };

    static KvConfig parse(std::istream& in, const std::string& source = "<stream>");
    static KvConfig load(const std::filesystem::path& path);

    bool has_section(const std::string& section) const;
    const std::vector<Entry>& section(const std::string& section) const;
    std::vector<std::string> sections() const;

    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key, long fallback) const;

    const std::string& source() const { return source_; }

private:
    std::string source_;
    std::vector<std::string> order_;
    std::map<std::string, std::vector<Entry>> sections_;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
double parse_double(const std::string& text, const std::string& what);
long parse_int(const std::string& text, const std::string& what);

} // namespace govdisc

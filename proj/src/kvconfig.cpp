#include "govdisc/kvconfig.hpp"

#include "govdisc/error.hpp"

#include <charconv>
#include <fstream>

namespace govdisc {

std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& text, const std::string& what) {
    std::string t = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("cannot parse '" + t + "' as a number for " + what);
    return v;
}

long parse_int(const std::string& text, const std::string& what) {
    std::string t = trim(text);
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("cannot parse '" + t + "' as an integer for " + what);
    return v;
}

KvConfig KvConfig::parse(std::istream& in, const std::string& source) {
    KvConfig cfg;
    cfg.source_ = source;
    std::string current;
    cfg.order_.push_back(current);
    cfg.sections_[current];
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(source + ":" + std::to_string(lineno) + ": unterminated section header");
            current = trim(std::string_view(t).substr(1, t.size() - 2));
            if (!cfg.sections_.count(current)) cfg.order_.push_back(current);
            cfg.sections_[current];
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        Entry e{trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)), lineno};
        if (e.key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        cfg.sections_[current].push_back(std::move(e));
    }
    return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
}

bool KvConfig::has_section(const std::string& s) const { return sections_.count(s) > 0; }

const std::vector<KvConfig::Entry>& KvConfig::section(const std::string& s) const {
    static const std::vector<Entry> empty;
    auto it = sections_.find(s);
    return it == sections_.end() ? empty : it->second;
}

std::vector<std::string> KvConfig::sections() const { return order_; }

std::optional<std::string> KvConfig::get(const std::string& s, const std::string& key) const {
    for (const auto& e : section(s))
        if (e.key == key) return e.value;
    return std::nullopt;
}

std::string KvConfig::get_or(const std::string& s, const std::string& key, const std::string& fallback) const {
    auto v = get(s, key);
    return v ? *v : fallback;
}

double KvConfig::get_double(const std::string& s, const std::string& key, double fallback) const {
    auto v = get(s, key);
    return v ? parse_double(*v, s + "." + key) : fallback;
}

long KvConfig::get_int(const std::string& s, const std::string& key, long fallback) const {
    auto v = get(s, key);
    return v ? parse_int(*v, s + "." + key) : fallback;
}

} // namespace govdisc

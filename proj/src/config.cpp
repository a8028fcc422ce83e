#include "aodmap/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aodmap/error.hpp"

namespace aodmap {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',' || ch == ' ' || ch == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return *end == '\0';
}

}  // namespace

Config Config::parse(std::string_view text, std::string source) {
    Config cfg;
    cfg.source_ = std::move(source);
    std::istringstream in{std::string(text)};
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find_first_of("#;");
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const std::string where = cfg.source_ + ":" + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) throw ConfigError(where + "invalid section name '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_name(key)) throw ConfigError(where + "invalid key '" + key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(full)) throw ConfigError(where + "duplicate key '" + full + "'");
        cfg.entries_[full] = {trim(line.substr(eq + 1)), lineno};
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), file.string());
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

const Config::Entry* Config::find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

void Config::fail(const std::string& key, const std::string& what) const {
    const Entry* e = find(key);
    const std::string where = (e && e->line > 0) ? source_ + ":" + std::to_string(e->line) : "command line";
    throw ConfigError(where + ": key '" + key + "': " + what);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    double v = 0.0;
    if (!parse_double(e->value, v)) fail(key, "expected a number, got '" + e->value + "'");
    return v;
}

int Config::get_int(const std::string& key, int fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    int v = 0;
    const auto* b = e->value.data();
    const auto [ptr, ec] = std::from_chars(b, b + e->value.size(), v);
    if (ec != std::errc() || ptr != b + e->value.size() || e->value.empty())
        fail(key, "expected an integer, got '" + e->value + "'");
    return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const auto* b = e->value.data();
    const auto [ptr, ec] = std::from_chars(b, b + e->value.size(), v);
    if (ec != std::errc() || ptr != b + e->value.size() || e->value.empty())
        fail(key, "expected a nonnegative integer, got '" + e->value + "'");
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(key, "expected a boolean, got '" + e->value + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const auto& tok : split_list(e->value)) {
        double v = 0.0;
        if (!parse_double(tok, v)) fail(key, "expected a list of numbers, got '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::vector<int> out;
    for (const auto& tok : split_list(e->value)) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(key, "expected a list of integers, got '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

void Config::require_known(const std::set<std::string>& known) const {
    for (const auto& [key, entry] : entries_)
        if (!known.count(key)) fail(key, "unknown key");
}

std::string Config::canonical() const {
    std::string s;
    for (const auto& [key, entry] : entries_) s += key + "=" + entry.value + "\n";
    return s;
}

}  // namespace aodmap

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace aodmap {

// Sectioned key = value text. Keys are addressed as "section.key"; keys before
// the first section header are top-level. '#' and ';' start comments.
class Config {
public:
    static Config parse(std::string_view text, std::string source = "<config>");
    static Config load(const std::filesystem::path& file);

    // Command-line override; later calls win.
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;

    // Throws ConfigError, anchored at the offending line, for keys outside `known`.
    void require_known(const std::set<std::string>& known) const;

    // Sorted key=value lines; stable input for hashing.
    std::string canonical() const;
    const std::string& source() const { return source_; }

private:
    struct Entry {
        std::string value;
        int line = 0;  // 0 = command line
    };
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;
    const Entry* find(const std::string& key) const;

    std::string source_;
    std::map<std::string, Entry> entries_;
};

}  // namespace aodmap

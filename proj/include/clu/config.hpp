#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace clu {

/// Flat key/value configuration with nested sections.
///
/// Grammar (one entry per line):
///   line    := blank | comment | section | binding
///   comment := "#" ...
///   section := "[" name ("." name)* "]"
///   binding := key "=" value          key may itself be dotted
///
/// A binding inside section [a.b] with key "c" lands under "a.b.c". Values
/// keep everything after '=' with surrounding whitespace trimmed; trailing
/// "#" comments are stripped. Lists are comma-separated.
class ConfigMap {
public:
    static ConfigMap parse_file(const std::string& path);
    static ConfigMap parse_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;

    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;

    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<std::int64_t> get_int_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace clu

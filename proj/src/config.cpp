#include "clu/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "clu/errors.hpp"

namespace clu {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

ConfigMap ConfigMap::parse_string(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("config: unterminated section header at line " +
                                      std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ValidationError("config: empty section name at line " + std::to_string(line_no));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: expected 'key = value' at line " + std::to_string(line_no));
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError("config: empty key at line " + std::to_string(line_no));
        if (!section.empty()) key = section + "." + key;
        cfg.entries_[key] = value;
    }
    return cfg;
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigMap::get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ValidationError("config: missing key '" + key + "'");
    return it->second;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key) const {
    try {
        return std::stod(get_string(key));
    } catch (const std::invalid_argument&) {
        throw ValidationError("config: key '" + key + "' is not a number");
    }
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t ConfigMap::get_int(const std::string& key) const {
    try {
        return std::stoll(get_string(key));
    } catch (const std::invalid_argument&) {
        throw ValidationError("config: key '" + key + "' is not an integer");
    }
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool ConfigMap::get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("config: key '" + key + "' is not a boolean");
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::vector<std::string> ConfigMap::get_list(const std::string& key) const {
    const std::string raw = get_string(key);
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& s : get_list(key)) out.push_back(std::stod(s));
    return out;
}

std::vector<std::int64_t> ConfigMap::get_int_list(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const std::string& s : get_list(key)) out.push_back(std::stoll(s));
    return out;
}

void ConfigMap::set(const std::string& key, const std::string& value) { entries_[key] = value; }

}  // namespace clu

#include "flashsim/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace flashsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    cfg.text_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + full +
                              "'");
        cfg.values_[full] = value;
        cfg.lines_[full] = lineno;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const std::string& Config::fetch(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    consumed_.insert(key);
    return it->second;
}

std::string Config::get_string(const std::string& key) { return fetch(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return fetch(key);
}

double Config::get_double(const std::string& key) {
    const std::string& v = fetch(key);
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse '" + v + "' as a real number");
    }
}

double Config::get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return get_double(key);
}

std::int64_t Config::get_int(const std::string& key) {
    const std::string& v = fetch(key);
    std::int64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("key '" + key + "': cannot parse '" + v + "' as an integer");
    return x;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    return get_int(key);
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const std::string& v = fetch(key);
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("key '" + key + "': cannot parse '" + v + "' as an unsigned integer");
    return x;
}

bool Config::get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string& v = fetch(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': cannot parse '" + v + "' as a boolean");
}

void Config::reject_unconsumed() const {
    std::string unknown;
    for (const auto& [key, value] : values_)
        if (!consumed_.count(key)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += "'" + key + "' (line " + std::to_string(lines_.at(key)) + ")";
        }
    if (!unknown.empty()) throw ConfigError("unknown configuration keys: " + unknown);
}

}  // namespace flashsim

#ifndef FLASHSIM_CONFIG_HPP
#define FLASHSIM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "flashsim/errors.hpp"

namespace flashsim {

// Key-value configuration with bracketed (dot-nested) sections:
//
//   # comment
//   [model]
//   kind = grw
//   [model.grid]
//   x_min = -4.0
//
// Keys flatten to "model.grid.x_min".  Parsing is strict: every key present
// in the file must be consumed by the reader, and unknown keys fail loudly.
class Config {
public:
    static Config parse(const std::string& text);
    static Config parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key);
    double get_double(const std::string& key, double fallback);
    std::int64_t get_int(const std::string& key);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);

    // throws ConfigError listing every key never consumed by a getter
    void reject_unconsumed() const;

    const std::map<std::string, std::string>& raw() const { return values_; }
    const std::string& text() const { return text_; }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::set<std::string> consumed_;
    std::string text_;

    const std::string& fetch(const std::string& key);
};

}  // namespace flashsim

#endif

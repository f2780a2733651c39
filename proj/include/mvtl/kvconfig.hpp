#pragma once

#include "mvtl/core.hpp"

#include <map>
#include <string>

namespace mvtl {

/// "key=value" lines; '#' starts a comment line, whitespace around keys and
/// values is ignored. Used for metadata sidecars and experiment configs.
class KeyValues {
public:
    KeyValues() = default;
    static KeyValues parse(const std::string& text, const std::string& origin = {});
    static KeyValues load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    double get_double(const std::string& key) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;

    std::string to_string() const;

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

}  // namespace mvtl

#include "mvtl/kvconfig.hpp"

#include "mvtl/csv.hpp"

#include <charconv>
#include <sstream>

namespace mvtl {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text, const std::string& origin) {
    KeyValues kv;
    kv.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError("expected key=value", origin, number);
        kv.values_[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
    }
    return kv;
}

KeyValues KeyValues::load(const std::string& path) {
    return parse(csv::read_file(path), path);
}

std::string KeyValues::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ParseError("missing key '" + key + "'", origin_, 0);
    return it->second;
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key) const {
    return csv::parse_number(get(key), origin_.empty() ? key : origin_ + " [" + key + "]", 0);
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::size_t KeyValues::get_size(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
        throw ParseError("key '" + key + "' expects a non-negative integer, got '" + v + "'", origin_, 0);
    return out;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ParseError("key '" + key + "' expects a boolean, got '" + v + "'", origin_, 0);
}

std::vector<double> KeyValues::get_doubles(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& cell : csv::split(get(key))) {
        out.push_back(csv::parse_number(cell, origin_.empty() ? key : origin_ + " [" + key + "]", 0));
    }
    return out;
}

std::string KeyValues::to_string() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
}

}  // namespace mvtl

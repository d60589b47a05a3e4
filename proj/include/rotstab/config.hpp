#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rotstab/errors.hpp"

namespace rotstab {

/// Flat "key = value" configuration text with `include <path>` support
/// (paths resolved relative to the including file). Later assignments win,
/// so sweep files can include a base config and override a few keys.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig from_file(const std::string& path) {
        KeyValueConfig c;
        c.load(path, 0);
        return c;
    }
    static KeyValueConfig from_string(const std::string& text) {
        KeyValueConfig c;
        std::istringstream in(text);
        c.parse_stream(in, ".", 0);
        return c;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': cannot parse '" + it->second +
                              "' as a number");
        }
    }
    long get_long(const std::string& key, long fallback) const {
        double v = get_double(key, static_cast<double>(fallback));
        long l = std::lround(v);
        if (std::abs(v - l) > 1e-12)
            throw ConfigError("config key '" + key + "': expected an integer");
        return l;
    }
    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& s = it->second;
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw ConfigError("config key '" + key + "': expected a boolean");
    }
    /// Comma-separated list of numbers.
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::istringstream in(it->second);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("config key '" + key + "': bad list element '" + tok + "'");
            }
        }
        if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    void load(const std::string& path, int depth) {
        if (depth > 16) throw ConfigError("config include depth exceeded at " + path);
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        parse_stream(in, std::filesystem::path(path).parent_path().string(), depth);
    }

    void parse_stream(std::istream& in, const std::string& base_dir, int depth) {
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            lineno++;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            if (line.rfind("include ", 0) == 0) {
                std::filesystem::path inc = trim(line.substr(8));
                if (inc.is_relative()) inc = std::filesystem::path(base_dir) / inc;
                load(inc.string(), depth + 1);
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("config: empty key");
            values_[key] = value;
        }
    }

    std::map<std::string, std::string> values_;
};

}  // namespace rotstab

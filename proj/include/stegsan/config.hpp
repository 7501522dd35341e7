#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stegsan {

// Plain-text key=value configuration. '#' starts a comment, blank lines are
// ignored, and keys outside the allowed set are rejected.
class KvConfig {
public:
    static KvConfig parse_string(const std::string& text) {
        KvConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": expected key=value");
            std::string key = trim(trimmed.substr(0, eq));
            std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static KvConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str());
    }

    void reject_unknown_keys(const std::set<std::string>& allowed) const {
        for (const auto& [key, value] : values_)
            if (!allowed.count(key))
                throw std::runtime_error("config: unknown key '" + key + "'");
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_long(key, it->second);
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size())
            throw std::runtime_error("config: bad number for '" + key + "'");
        return v;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return static_cast<std::uint64_t>(std::stoull(it->second));
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
        if (v == "0" || v == "false" || v == "no" || v == "off") return false;
        throw std::runtime_error("config: bad boolean for '" + key + "'");
    }

    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }
    static long parse_long(const std::string& key, const std::string& v) {
        std::size_t pos = 0;
        long out = std::stol(v, &pos);
        if (pos != v.size()) throw std::runtime_error("config: bad integer for '" + key + "'");
        return out;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace stegsan

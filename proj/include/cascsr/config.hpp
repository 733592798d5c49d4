#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cascsr/errors.hpp"

namespace cascsr {

// Flat key-value text format shared by solver configs, cascade plans and
// benchmark suites. One `key = value` per line, `#` starts a comment.
// Unknown keys are preserved so configs can be merged and rewritten.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config " + path);
        KeyValueConfig cfg;
        cfg.parse(in, path);
        return cfg;
    }

    static KeyValueConfig from_string(const std::string& text) {
        std::istringstream in(text);
        KeyValueConfig cfg;
        cfg.parse(in, "<string>");
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void set(const std::string& key, double value) {
        std::ostringstream os;
        os.precision(17);
        os << value;
        values_[key] = os.str();
    }
    void set(const std::string& key, long long value) { values_[key] = std::to_string(value); }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ParameterError("config: missing key '" + key + "'");
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    long long get_int(const std::string& key) const { return parse_int(key, get_string(key)); }
    long long get_int(const std::string& key, long long fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    // Whitespace-separated list value, e.g. `methods = bicubic lorig mfsf`.
    std::vector<std::string> get_list(const std::string& key) const {
        std::istringstream is(get_string(key));
        std::vector<std::string> items;
        std::string item;
        while (is >> item) items.push_back(item);
        return items;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

    std::string to_string() const {
        std::ostringstream os;
        for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write config " + path);
        out << to_string();
    }

private:
    void parse(std::istream& in, const std::string& origin) {
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ParameterError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ParameterError(origin + ":" + std::to_string(lineno) + ": empty key");
            values_[key] = value;
        }
    }

    static std::string trim(const std::string& s) {
        const auto first = s.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) return "";
        const auto last = s.find_last_not_of(" \t\r\n");
        return s.substr(first, last - first + 1);
    }

    static double parse_double(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ParameterError("config: key '" + key + "' is not a number: '" + s + "'");
        }
    }

    static long long parse_int(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ParameterError("config: key '" + key + "' is not an integer: '" + s + "'");
        }
    }

    std::map<std::string, std::string> values_;
};

}  // namespace cascsr

#include "mfg/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfg {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool parse_double(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_int(const std::string& s, int& out) {
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) return false;
        out = static_cast<int>(v);
        return static_cast<long>(out) == v;
    } catch (...) {
        return false;
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    return parts;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    std::vector<std::string> problems;
    while (std::getline(ss, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            problems.push_back("line " + std::to_string(line_no) + ": empty key or value");
            continue;
        }
        if (cfg.raw_.count(key))
            problems.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        cfg.raw_[key] = value;
    }
    if (!problems.empty()) {
        std::string msg = "config: parse errors:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw std::runtime_error(msg);
    }
    return cfg;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
    auto it = raw_.find(key);
    double v = fallback;
    if (it != raw_.end() && !parse_double(it->second, v))
        throw std::runtime_error("config: key '" + key + "' is not a number");
    std::ostringstream os;
    os.precision(17);
    os << v;
    resolved_[key] = os.str();
    return v;
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
    auto it = raw_.find(key);
    int v = fallback;
    if (it != raw_.end() && !parse_int(it->second, v))
        throw std::runtime_error("config: key '" + key + "' is not an integer");
    resolved_[key] = std::to_string(v);
    return v;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = raw_.find(key);
    bool v = fallback;
    if (it != raw_.end()) {
        if (it->second == "true" || it->second == "1")
            v = true;
        else if (it->second == "false" || it->second == "0")
            v = false;
        else
            throw std::runtime_error("config: key '" + key + "' is not a boolean");
    }
    resolved_[key] = v ? "true" : "false";
    return v;
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = raw_.find(key);
    const std::string v = it != raw_.end() ? it->second : fallback;
    resolved_[key] = v;
    return v;
}

std::vector<int> ExperimentConfig::get_int_list(const std::string& key,
                                                const std::vector<int>& fallback) const {
    auto it = raw_.find(key);
    std::vector<int> v;
    if (it == raw_.end()) {
        v = fallback;
    } else {
        for (const auto& part : split_list(it->second)) {
            int x = 0;
            if (!parse_int(part, x))
                throw std::runtime_error("config: key '" + key + "' has a non-integer entry");
            v.push_back(x);
        }
    }
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    resolved_[key] = s;
    return v;
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key,
                                                      const std::vector<double>& fallback) const {
    auto it = raw_.find(key);
    std::vector<double> v;
    if (it == raw_.end()) {
        v = fallback;
    } else {
        for (const auto& part : split_list(it->second)) {
            double x = 0;
            if (!parse_double(part, x))
                throw std::runtime_error("config: key '" + key + "' has a non-numeric entry");
            v.push_back(x);
        }
    }
    std::ostringstream os;
    os.precision(17);
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    resolved_[key] = os.str();
    return v;
}

double ExperimentConfig::require_double(const std::string& key) const {
    if (!has(key)) throw std::runtime_error("config: missing required key '" + key + "'");
    return get_double(key, 0.0);
}

int ExperimentConfig::require_int(const std::string& key) const {
    if (!has(key)) throw std::runtime_error("config: missing required key '" + key + "'");
    return get_int(key, 0);
}

std::string ExperimentConfig::require_string(const std::string& key) const {
    if (!has(key)) throw std::runtime_error("config: missing required key '" + key + "'");
    return get_string(key, "");
}

std::map<std::string, double> ExperimentConfig::model_params() const {
    std::map<std::string, double> params;
    for (const auto& [key, value] : raw_) {
        if (key.rfind("model.", 0) != 0 || key == "model.name") continue;
        double v = 0.0;
        if (!parse_double(value, v))
            throw std::runtime_error("config: model parameter '" + key + "' is not a number");
        params[key.substr(6)] = v;
        resolved_[key] = value;
    }
    return params;
}

std::vector<std::string> ExperimentConfig::validate(
    const std::vector<std::string>& allowed_keys) const {
    std::vector<std::string> problems;
    for (const auto& [key, value] : raw_) {
        bool ok = false;
        for (const auto& allowed : allowed_keys) {
            if (!allowed.empty() && allowed.back() == '.') {
                if (key.rfind(allowed, 0) == 0) { ok = true; break; }
            } else if (key == allowed) {
                ok = true;
                break;
            }
        }
        if (!ok) problems.push_back("unknown key '" + key + "'");
    }
    return problems;
}

std::string canonical_config_text(const std::map<std::string, std::string>& resolved) {
    std::string text;
    for (const auto& [key, value] : resolved) text += key + " = " + value + "\n";
    return text;
}

}  // namespace mfg

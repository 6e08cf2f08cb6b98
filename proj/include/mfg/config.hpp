#pragma once

#include <map>
#include <string>
#include <vector>

namespace mfg {

// Flat `key = value` configuration with `#` comments and dotted keys.
// Validation is total: a run sees either a fully valid config or the
// complete list of problems, never a partial read.
class ExperimentConfig {
  public:
    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse_string(const std::string& text);

    bool has(const std::string& key) const { return raw_.count(key) != 0; }

    // Typed getters; every access records the resolved value, so the
    // report can embed exactly what the run used (defaults included).
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;

    double require_double(const std::string& key) const;
    int require_int(const std::string& key) const;
    std::string require_string(const std::string& key) const;

    const std::map<std::string, std::string>& raw() const { return raw_; }
    // Keys actually read, with the values in effect (file value or default).
    const std::map<std::string, std::string>& resolved() const { return resolved_; }
    // Model parameters: every numeric `model.*` key except model.name.
    std::map<std::string, double> model_params() const;

    // Checks the raw keys against an allowed set (exact names or prefixes
    // ending in '.') and runs the per-experiment semantic checks (grid
    // sanity, CFL pre-validation). Returns every problem found.
    std::vector<std::string> validate(const std::vector<std::string>& allowed_keys) const;

  private:
    std::map<std::string, std::string> raw_;
    mutable std::map<std::string, std::string> resolved_;
};

// Canonical text of a resolved configuration (sorted `key = value`
// lines); the report hash is the git-style blob hash of this text.
std::string canonical_config_text(const std::map<std::string, std::string>& resolved);

}  // namespace mfg

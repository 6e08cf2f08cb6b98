#pragma once

#include <string>

#include "mfg/config.hpp"
#include "mfg/report.hpp"

namespace mfg {

// Experiment drivers behind the CLI subcommands. Each validates its
// configuration exhaustively before simulating, writes report.json plus
// CSV data into out_dir, and returns the report for in-process callers.
// Outputs are byte-stable functions of (config, seed set); wall-clock
// metadata goes to meta.json only.
json run_chaos(const ExperimentConfig& cfg, const std::string& out_dir);
json run_tagged_chaos(const ExperimentConfig& cfg, const std::string& out_dir);
json run_generator_check(const ExperimentConfig& cfg, const std::string& out_dir);
json run_sensitivity(const ExperimentConfig& cfg, const std::string& out_dir);
json run_mfg(const ExperimentConfig& cfg, const std::string& out_dir);
json run_nash(const ExperimentConfig& cfg, const std::string& out_dir);
json run_spde_solve(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace mfg

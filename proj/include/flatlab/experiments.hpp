#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace flatlab {

// One named experiment per reproduced figure/table. Artifacts are CSV/SVG
// files under out_dir plus a manifest.txt of content digests; every file
// embeds the effective configuration so it can be reproduced from itself.
struct ExperimentConfig {
    std::string name;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    int threads = 1;
    // overrides on top of the experiment's built-in defaults
    std::map<std::string, std::string> params;
};

struct ExperimentResult {
    // headline numbers, also written to summary.csv
    std::map<std::string, double> summary;
    // artifact file names relative to out_dir, manifest order
    std::vector<std::string> artifacts;
};

std::vector<std::string> experiment_names();

// Throws ConfigError for unknown names or bad parameters, NumericalError for
// runtime failures. Deterministic: same config (including seed, excluding
// threads) gives byte-identical artifacts.
ExperimentResult run_experiment(const ExperimentConfig& config);

} // namespace flatlab

#pragma once

#include <filesystem>
#include <string>

#include "qdpg/loop.hpp"

namespace qdpg {

/// Raised on any malformed, unknown, missing or unparsable config entry;
/// the message carries file and line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Full experiment description loaded from the flat key-value config file.
/// Sections and keys are documented in the README; unknown keys are errors.
struct RunConfig {
    std::string task;
    bool uncertain = false;
    std::uint64_t master_seed = 0;
    int n_replications = 1;
    std::string out_dir; // optional; the CLI may override
    int correct_reevals = 50;
    int n_centroids = 1024;
    int cvt_samples = 0; // 0 -> 20 * n_centroids
    AlgoConfig algo;
};

RunConfig load_run_config(const std::filesystem::path& file);

} // namespace qdpg

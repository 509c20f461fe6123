#pragma once

#include <filesystem>
#include <vector>

#include "qdpg/config.hpp"

namespace qdpg {

/// Replication seed rule: run_seed = master_seed + replication index.
std::uint64_t replication_seed(std::uint64_t master_seed, int replication);

/// Executes all replications of one experiment into `out_dir`
/// (rep_### subdirectories, shared centroids.csv, summary.csv, manifest).
/// Returns a process exit status; failures leave a partial manifest.
int run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// One experiment per GA/PG proportion with shared replication seeds, plus
/// ablation_summary.csv and pairwise stats.csv over the final metrics.
int run_ablation(const RunConfig& cfg, const std::vector<double>& proportions,
                 const std::filesystem::path& out_dir);

/// Recomputes the corrected report for an already-dumped replication
/// directory (needs its run_info.txt, centroids.csv, archive dump).
int run_correction(const std::filesystem::path& rep_dir, int n_reeval);

} // namespace qdpg

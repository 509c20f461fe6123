#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qdpg/archive.hpp"
#include "qdpg/loop.hpp"

namespace qdpg {

/// Round-trip decimal rendering (%.17g); the anchor of byte-reproducible
/// CSV output.
std::string fmt_double(double x);

/// Minimal CSV emitter: one header, then rows of pre-rendered cells.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::size_t n_cols_;
};

/// archive.csv (cell_id, centroid coords, bd coords, fitness,
/// genotype_offset) plus a genotypes.bin sidecar of length-prefixed
/// little-endian float64 vectors; offsets index into the sidecar.
void dump_archive(const CvtArchive& archive, const std::filesystem::path& dir);

/// Rebuilds an archive from dump_archive output. Elites keep fitness, bd and
/// genotype; eval ids are not part of the dump and read back as 0.
CvtArchive load_archive(const std::filesystem::path& dir, std::vector<BdPoint> centroids);

void write_centroids(const std::filesystem::path& file, const std::vector<BdPoint>& centroids);
std::vector<BdPoint> read_centroids(const std::filesystem::path& file);

void write_metrics_csv(const std::filesystem::path& file, const std::vector<RunRecord>& records);
void write_operators_csv(const std::filesystem::path& file, const std::vector<RunRecord>& records);
void write_critic_log_csv(const std::filesystem::path& file,
                          const std::vector<CriticLogEntry>& log);

std::uint64_t fnv1a_file(const std::filesystem::path& file);

/// manifest.txt: status line, optional error line, then one
/// "<relpath> <fnv1a-64 hex> <bytes>" line per file (sorted).
void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& rel_files,
                    bool complete, const std::string& error = "");

/// Linear-interpolation quantile of an unsorted sample (q in [0,1]).
double quantile(std::vector<double> values, double q);

} // namespace qdpg

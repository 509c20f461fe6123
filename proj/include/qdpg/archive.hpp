#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "qdpg/mlp.hpp"
#include "qdpg/rng.hpp"

namespace qdpg {

/// Point in behaviour-descriptor space, each coordinate normalized to [0,1].
using BdPoint = std::vector<double>;

/// Mean that is bitwise-exact when all samples are equal: first + mean of
/// deviations from first. Plain sum/n accumulates rounding and would break
/// the exact-zero loss guarantees on deterministic tasks.
double exact_mean(std::span<const double> values);

/// Lloyd's k-means over uniform samples in [0,1]^bd_dim. Stops when the max
/// centroid movement drops below 1e-6 or after 100 iterations. Deterministic
/// for a given seed.
std::vector<BdPoint> build_cvt(int bd_dim, int n_centroids, int n_samples, std::uint64_t seed);

enum class AddOutcome { NewCell, Improved, Rejected };

struct Elite {
    ParamVector genotype;
    double fitness = 0.0;
    BdPoint bd;
    std::int64_t eval_id = 0;
};

/// CVT-shaped MAP-Elites archive: one elite per occupied Voronoi cell.
class CvtArchive {
public:
    explicit CvtArchive(std::vector<BdPoint> centroids);

    /// Index of the Euclidean-nearest centroid; exact ties break low.
    int cell_index(const BdPoint& bd) const;

    /// NewCell if the cell is empty, Improved if fitness strictly beats the
    /// incumbent, Rejected otherwise (including non-finite fitness, which
    /// also bumps a warning counter). The archive is untouched on Rejected.
    AddOutcome try_add(const ParamVector& genotype, double fitness, const BdPoint& bd,
                       std::int64_t eval_id);

    /// k elites drawn uniformly with replacement over occupied cells.
    /// Throws std::runtime_error on an empty archive.
    std::vector<const Elite*> uniform_select(int k, Rng& rng) const;

    const std::map<int, Elite>& cells() const { return cells_; }
    const std::vector<BdPoint>& centroids() const { return centroids_; }
    std::size_t n_cells() const { return centroids_.size(); }
    std::size_t n_occupied() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    int bd_dim() const { return static_cast<int>(centroids_.front().size()); }
    int rejected_nonfinite() const { return warn_nonfinite_; }

private:
    std::vector<BdPoint> centroids_;
    std::map<int, Elite> cells_;
    std::vector<int> occupied_; // sorted, mirrors cells_ keys
    int warn_nonfinite_ = 0;
};

struct DeepEntry {
    ParamVector genotype;
    double fitness = 0.0;
    BdPoint bd;
};

/// Bounded per-cell store for the Deep-grid variant.
struct DeepCell {
    std::vector<DeepEntry> entries;
};

/// Appends `entry`; once over capacity, evicts one uniformly-random older
/// entry, so the newest always survives.
void deep_cell_add(DeepCell& cell, DeepEntry entry, int depth, Rng& rng);

/// Uniformly-drawn entry for reproduction plus the cell's mean fitness.
/// Throws std::runtime_error on an empty cell.
std::pair<const DeepEntry*, double> deep_cell_select(const DeepCell& cell, Rng& rng);

/// Deep-grid archive: same CVT geometry, up to `depth` entries per cell.
class DeepGridArchive {
public:
    DeepGridArchive(std::vector<BdPoint> centroids, int depth);

    int cell_index(const BdPoint& bd) const;
    void add(const ParamVector& genotype, double fitness, const BdPoint& bd, Rng& rng);

    /// Uniform over occupied cells, then uniform within the cell.
    std::pair<const DeepEntry*, double> select_uniform(Rng& rng) const;

    const std::map<int, DeepCell>& cells() const { return cells_; }
    const std::vector<BdPoint>& centroids() const { return centroids_; }
    std::size_t n_cells() const { return centroids_.size(); }
    std::size_t n_occupied() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    int depth() const { return depth_; }

    /// Best entry per cell, as a regular archive, for reporting and dumps.
    CvtArchive reported() const;

private:
    std::vector<BdPoint> centroids_;
    std::map<int, DeepCell> cells_;
    std::vector<int> occupied_;
    int depth_;
};

} // namespace qdpg

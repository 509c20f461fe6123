#include "qdpg/archive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdpg {

double exact_mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("exact_mean: empty input");
    const double first = values[0];
    double dev = 0.0;
    for (double v : values) dev += v - first;
    return first + dev / static_cast<double>(values.size());
}

namespace {

double sq_dist(const BdPoint& a, const BdPoint& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

int nearest_centroid(const std::vector<BdPoint>& centroids, const BdPoint& bd) {
    int best = 0;
    double best_d = sq_dist(centroids[0], bd);
    for (int j = 1; j < static_cast<int>(centroids.size()); ++j) {
        const double d = sq_dist(centroids[j], bd);
        if (d < best_d) { // strict: ties keep the lowest index
            best_d = d;
            best = j;
        }
    }
    return best;
}

} // namespace

std::vector<BdPoint> build_cvt(int bd_dim, int n_centroids, int n_samples, std::uint64_t seed) {
    if (n_centroids < 1) throw std::invalid_argument("build_cvt: n_centroids must be >= 1");
    if (n_samples < n_centroids)
        throw std::invalid_argument("build_cvt: n_samples must be >= n_centroids");

    Rng rng(seed);
    std::vector<BdPoint> samples(n_samples, BdPoint(bd_dim));
    for (auto& s : samples)
        for (double& x : s) x = rng.uniform();

    std::vector<BdPoint> centroids(samples.begin(), samples.begin() + n_centroids);

    std::vector<double> sums(static_cast<std::size_t>(n_centroids) * bd_dim);
    std::vector<int> counts(n_centroids);
    for (int iter = 0; iter < 100; ++iter) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (const auto& s : samples) {
            const int c = nearest_centroid(centroids, s);
            counts[c] += 1;
            double* acc = sums.data() + static_cast<std::size_t>(c) * bd_dim;
            for (int d = 0; d < bd_dim; ++d) acc[d] += s[d];
        }
        double max_move_sq = 0.0;
        for (int c = 0; c < n_centroids; ++c) {
            if (counts[c] == 0) continue; // empty cluster keeps its centroid
            const double* acc = sums.data() + static_cast<std::size_t>(c) * bd_dim;
            double move_sq = 0.0;
            for (int d = 0; d < bd_dim; ++d) {
                const double nc = acc[d] / counts[c];
                const double diff = nc - centroids[c][d];
                move_sq += diff * diff;
                centroids[c][d] = nc;
            }
            max_move_sq = std::max(max_move_sq, move_sq);
        }
        if (max_move_sq < 1e-6 * 1e-6) break;
    }
    return centroids;
}

CvtArchive::CvtArchive(std::vector<BdPoint> centroids) : centroids_(std::move(centroids)) {
    if (centroids_.empty()) throw std::invalid_argument("CvtArchive: no centroids");
}

int CvtArchive::cell_index(const BdPoint& bd) const {
    if (bd.size() != centroids_.front().size())
        throw std::invalid_argument("cell_index: descriptor dimension mismatch");
    return nearest_centroid(centroids_, bd);
}

AddOutcome CvtArchive::try_add(const ParamVector& genotype, double fitness, const BdPoint& bd,
                               std::int64_t eval_id) {
    if (!std::isfinite(fitness)) {
        ++warn_nonfinite_;
        return AddOutcome::Rejected;
    }
    const int cell = cell_index(bd);
    auto it = cells_.find(cell);
    if (it == cells_.end()) {
        cells_.emplace(cell, Elite{genotype, fitness, bd, eval_id});
        occupied_.insert(std::lower_bound(occupied_.begin(), occupied_.end(), cell), cell);
        return AddOutcome::NewCell;
    }
    if (fitness > it->second.fitness) { // strict: equal fitness keeps the incumbent
        it->second = Elite{genotype, fitness, bd, eval_id};
        return AddOutcome::Improved;
    }
    return AddOutcome::Rejected;
}

std::vector<const Elite*> CvtArchive::uniform_select(int k, Rng& rng) const {
    if (cells_.empty())
        throw std::runtime_error("uniform_select: archive is empty; run the init phase first");
    std::vector<const Elite*> picked;
    picked.reserve(k);
    for (int i = 0; i < k; ++i) {
        const int cell = occupied_[rng.uniform_index(occupied_.size())];
        picked.push_back(&cells_.at(cell));
    }
    return picked;
}

void deep_cell_add(DeepCell& cell, DeepEntry entry, int depth, Rng& rng) {
    cell.entries.push_back(std::move(entry));
    if (static_cast<int>(cell.entries.size()) > depth) {
        // evict among the older entries only; the newcomer stays
        const std::size_t victim = rng.uniform_index(cell.entries.size() - 1);
        cell.entries.erase(cell.entries.begin() + static_cast<std::ptrdiff_t>(victim));
    }
}

std::pair<const DeepEntry*, double> deep_cell_select(const DeepCell& cell, Rng& rng) {
    if (cell.entries.empty()) throw std::runtime_error("deep_cell_select: empty cell");
    const DeepEntry* e = &cell.entries[rng.uniform_index(cell.entries.size())];
    std::vector<double> fits(cell.entries.size());
    for (std::size_t i = 0; i < cell.entries.size(); ++i) fits[i] = cell.entries[i].fitness;
    return {e, exact_mean(fits)};
}

DeepGridArchive::DeepGridArchive(std::vector<BdPoint> centroids, int depth)
    : centroids_(std::move(centroids)), depth_(depth) {
    if (centroids_.empty()) throw std::invalid_argument("DeepGridArchive: no centroids");
    if (depth_ < 1) throw std::invalid_argument("DeepGridArchive: depth must be >= 1");
}

int DeepGridArchive::cell_index(const BdPoint& bd) const {
    if (bd.size() != centroids_.front().size())
        throw std::invalid_argument("cell_index: descriptor dimension mismatch");
    return nearest_centroid(centroids_, bd);
}

void DeepGridArchive::add(const ParamVector& genotype, double fitness, const BdPoint& bd,
                          Rng& rng) {
    const int cell = cell_index(bd);
    auto it = cells_.find(cell);
    if (it == cells_.end()) {
        it = cells_.emplace(cell, DeepCell{}).first;
        occupied_.insert(std::lower_bound(occupied_.begin(), occupied_.end(), cell), cell);
    }
    deep_cell_add(it->second, DeepEntry{genotype, fitness, bd}, depth_, rng);
}

std::pair<const DeepEntry*, double> DeepGridArchive::select_uniform(Rng& rng) const {
    if (cells_.empty())
        throw std::runtime_error("select_uniform: archive is empty; run the init phase first");
    const int cell = occupied_[rng.uniform_index(occupied_.size())];
    return deep_cell_select(cells_.at(cell), rng);
}

CvtArchive DeepGridArchive::reported() const {
    CvtArchive out(centroids_);
    for (const auto& [cell, deep] : cells_) {
        const DeepEntry* best = &deep.entries.front();
        for (const auto& e : deep.entries)
            if (e.fitness > best->fitness) best = &e;
        out.try_add(best->genotype, best->fitness, best->bd, 0);
    }
    return out;
}

} // namespace qdpg

#pragma once

#include <cstdint>

#include "qdpg/archive.hpp"
#include "qdpg/envs.hpp"

namespace qdpg {

struct MetricSet {
    double qd_score = 0.0;
    double coverage = 0.0;
    double max_fitness = 0.0;
};

/// qd_score = sum over occupied cells of (fitness - offset_floor);
/// coverage = occupied / total; empty archive reports qd 0, coverage 0 and
/// the floor as max fitness.
MetricSet compute_metrics(const CvtArchive& archive, double offset_floor);

/// Deep-grid run-time scoring: per-cell mean fitness feeds the QD-score,
/// max fitness ranges over every stored entry.
MetricSet compute_deep_metrics(const DeepGridArchive& archive, double offset_floor);

/// Re-evaluates every elite n_reeval times with fresh seeds, estimates its
/// ground truth as the mean fitness and mean BD, and re-inserts all elites
/// into a fresh archive (same centroids) in descending original-fitness
/// order. The input archive is untouched; re-evaluations never reach the
/// optimizer.
CvtArchive build_corrected_archive(const CvtArchive& archive, const Task& task,
                                   const MlpSpec& policy_spec, int n_reeval,
                                   std::uint64_t seed);

/// loss = (original - corrected) / original, defined as 0 when original = 0.
/// Negative values (reproducibility gains) are reported as-is.
double metric_loss(double original, double corrected);

struct CorrectedReport {
    MetricSet original;
    MetricSet corrected;
    double qd_score_loss = 0.0;
    double max_fitness_loss = 0.0;
    double coverage_loss = 0.0;
    int n_reeval = 0;
};

CorrectedReport corrected_report(const CvtArchive& archive, const Task& task,
                                 const MlpSpec& policy_spec, int n_reeval, std::uint64_t seed);

} // namespace qdpg

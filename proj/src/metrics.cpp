#include "qdpg/metrics.hpp"

#include <algorithm>

namespace qdpg {

MetricSet compute_metrics(const CvtArchive& archive, double offset_floor) {
    MetricSet m;
    if (archive.empty()) {
        m.max_fitness = offset_floor;
        return m;
    }
    double best = archive.cells().begin()->second.fitness;
    for (const auto& [cell, elite] : archive.cells()) {
        m.qd_score += elite.fitness - offset_floor;
        best = std::max(best, elite.fitness);
    }
    m.coverage = static_cast<double>(archive.n_occupied()) / archive.n_cells();
    m.max_fitness = best;
    return m;
}

MetricSet compute_deep_metrics(const DeepGridArchive& archive, double offset_floor) {
    MetricSet m;
    if (archive.empty()) {
        m.max_fitness = offset_floor;
        return m;
    }
    double best = archive.cells().begin()->second.entries.front().fitness;
    std::vector<double> fits;
    for (const auto& [cell, deep] : archive.cells()) {
        fits.clear();
        for (const auto& e : deep.entries) {
            fits.push_back(e.fitness);
            best = std::max(best, e.fitness);
        }
        m.qd_score += exact_mean(fits) - offset_floor;
    }
    m.coverage = static_cast<double>(archive.n_occupied()) / archive.n_cells();
    m.max_fitness = best;
    return m;
}

CvtArchive build_corrected_archive(const CvtArchive& archive, const Task& task,
                                   const MlpSpec& policy_spec, int n_reeval,
                                   std::uint64_t seed) {
    if (n_reeval < 1)
        throw std::invalid_argument("build_corrected_archive: n_reeval must be >= 1");

    struct Corrected {
        double original_fitness;
        int cell;
        const Elite* elite;
        double fitness;
        BdPoint bd;
    };

    Rng rng(seed);
    const int bd_dim = archive.bd_dim();
    std::vector<Corrected> rows;
    rows.reserve(archive.n_occupied());
    std::vector<double> fits(n_reeval);
    std::vector<std::vector<double>> bds(bd_dim, std::vector<double>(n_reeval));
    for (const auto& [cell, elite] : archive.cells()) {
        for (int r = 0; r < n_reeval; ++r) {
            const EvalResult res = evaluate(task, policy_spec, elite.genotype, rng.next_u64());
            fits[r] = res.fitness;
            for (int d = 0; d < bd_dim; ++d) bds[d][r] = res.bd[d];
        }
        BdPoint mean_bd(bd_dim);
        for (int d = 0; d < bd_dim; ++d) mean_bd[d] = exact_mean(bds[d]);
        rows.push_back(Corrected{elite.fitness, cell, &elite, exact_mean(fits), mean_bd});
    }

    // strongest first by original fitness, cell id breaks ties
    std::sort(rows.begin(), rows.end(), [](const Corrected& a, const Corrected& b) {
        if (a.original_fitness != b.original_fitness)
            return a.original_fitness > b.original_fitness;
        return a.cell < b.cell;
    });

    CvtArchive corrected(archive.centroids());
    for (const auto& row : rows)
        corrected.try_add(row.elite->genotype, row.fitness, row.bd, row.elite->eval_id);
    return corrected;
}

double metric_loss(double original, double corrected) {
    if (original == 0.0) return 0.0;
    return (original - corrected) / original;
}

CorrectedReport corrected_report(const CvtArchive& archive, const Task& task,
                                 const MlpSpec& policy_spec, int n_reeval, std::uint64_t seed) {
    const double floor = task.spec().fitness_floor;
    CorrectedReport report;
    report.n_reeval = n_reeval;
    report.original = compute_metrics(archive, floor);
    const CvtArchive corrected = build_corrected_archive(archive, task, policy_spec, n_reeval, seed);
    report.corrected = compute_metrics(corrected, floor);
    report.qd_score_loss = metric_loss(report.original.qd_score, report.corrected.qd_score);
    report.max_fitness_loss =
        metric_loss(report.original.max_fitness, report.corrected.max_fitness);
    report.coverage_loss = metric_loss(report.original.coverage, report.corrected.coverage);
    return report;
}

} // namespace qdpg

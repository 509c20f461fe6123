#pragma once

#include <span>
#include <vector>

namespace qdpg {

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value. Exact enumeration of
/// the rank-sum distribution when n_a + n_b <= 20 and there are no ties;
/// otherwise the normal approximation with tie and continuity corrections.
/// Degenerate input (every value identical across both samples) gives p = 1.
double wilcoxon_rank_sum(std::span<const double> sample_a, std::span<const double> sample_b);

/// One-sided variant, H1: sample_a stochastically greater than sample_b.
double wilcoxon_rank_sum_greater(std::span<const double> sample_a,
                                 std::span<const double> sample_b);

/// Bonferroni correction: each p mapped to min(1, p * k). Requires
/// k >= p_values.size().
std::vector<double> bonferroni(std::span<const double> p_values, int k);

/// The two computational routes behind wilcoxon_rank_sum, exposed so their
/// agreement can be checked directly. p_le / p_ge are the tail
/// probabilities of sample_a's rank sum.
struct WilcoxonTails {
    double p_le = 1.0;
    double p_ge = 1.0;
};

/// Exact rank-sum distribution; requires no ties and n_a + n_b <= 20.
WilcoxonTails wilcoxon_tails_exact(std::span<const double> sample_a,
                                   std::span<const double> sample_b);

/// Normal approximation with tie and continuity corrections.
WilcoxonTails wilcoxon_tails_normal(std::span<const double> sample_a,
                                    std::span<const double> sample_b);

} // namespace qdpg

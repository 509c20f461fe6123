#include "qdpg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace qdpg {

namespace {

struct RankSummary {
    double w_a = 0.0;        // rank sum of sample a (average ranks under ties)
    bool has_ties = false;
    double tie_term = 0.0;   // sum over tie groups of (t^3 - t)
};

RankSummary rank_samples(std::span<const double> a, std::span<const double> b) {
    struct Tagged {
        double value;
        bool from_a;
    };
    std::vector<Tagged> pool;
    pool.reserve(a.size() + b.size());
    for (double v : a) pool.push_back({v, true});
    for (double v : b) pool.push_back({v, false});
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Tagged& x, const Tagged& y) { return x.value < y.value; });

    RankSummary s;
    std::size_t i = 0;
    while (i < pool.size()) {
        std::size_t j = i;
        while (j < pool.size() && pool[j].value == pool[i].value) ++j;
        const std::size_t t = j - i;
        // average rank of the group, 1-based
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (pool[k].from_a) s.w_a += rank;
        if (t > 1) {
            s.has_ties = true;
            const double td = static_cast<double>(t);
            s.tie_term += td * td * td - td;
        }
        i = j;
    }
    return s;
}

// Number of k-subsets of ranks {1..n_total} with each possible rank sum.
// counts[k][s]; totals fit comfortably in uint64 for n_total <= 20.
std::vector<std::vector<std::uint64_t>> rank_sum_counts(int n_total, int k_max) {
    const int s_max = n_total * (n_total + 1) / 2;
    std::vector<std::vector<std::uint64_t>> counts(
        k_max + 1, std::vector<std::uint64_t>(s_max + 1, 0));
    counts[0][0] = 1;
    for (int e = 1; e <= n_total; ++e)
        for (int k = std::min(e, k_max); k >= 1; --k)
            for (int s = s_max; s >= e; --s)
                if (counts[k - 1][s - e]) counts[k][s] += counts[k - 1][s - e];
    return counts;
}

struct ExactTail {
    double p_le; // P(W <= w)
    double p_ge; // P(W >= w)
};

ExactTail exact_tails(int n_a, int n_b, int w_obs) {
    const int n = n_a + n_b;
    const auto counts = rank_sum_counts(n, n_a);
    const auto& dist = counts[n_a];
    long double total = 0.0L, le = 0.0L, ge = 0.0L;
    for (int s = 0; s < static_cast<int>(dist.size()); ++s) {
        if (!dist[s]) continue;
        total += dist[s];
        if (s <= w_obs) le += dist[s];
        if (s >= w_obs) ge += dist[s];
    }
    return {static_cast<double>(le / total), static_cast<double>(ge / total)};
}

bool all_identical(std::span<const double> a, std::span<const double> b) {
    const double v = a.empty() ? b.front() : a.front();
    for (double x : a)
        if (x != v) return false;
    for (double x : b)
        if (x != v) return false;
    return true;
}

// P(Z >= z) for standard normal.
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

struct ApproxTail {
    double p_le;
    double p_ge;
};

ApproxTail approx_tails(std::size_t n_a, std::size_t n_b, double w_a, double tie_term) {
    const double n = static_cast<double>(n_a + n_b);
    const double mean = static_cast<double>(n_a) * (n + 1.0) / 2.0;
    const double var = (static_cast<double>(n_a) * static_cast<double>(n_b) / 12.0) *
                       ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) return {1.0, 1.0};
    const double sd = std::sqrt(var);
    // continuity correction pulls each tail statistic half a rank toward the mean
    const double p_ge = normal_sf((w_a - mean - 0.5) / sd);
    const double p_le = normal_sf((mean - w_a - 0.5) / sd);
    return {p_le, p_ge};
}

void check_samples(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("wilcoxon_rank_sum: both samples must be non-empty");
}

} // namespace

WilcoxonTails wilcoxon_tails_exact(std::span<const double> sample_a,
                                   std::span<const double> sample_b) {
    check_samples(sample_a, sample_b);
    const RankSummary s = rank_samples(sample_a, sample_b);
    if (s.has_ties)
        throw std::invalid_argument("wilcoxon_tails_exact: ties require the normal path");
    if (sample_a.size() + sample_b.size() > 20)
        throw std::invalid_argument("wilcoxon_tails_exact: pooled size must be <= 20");
    const ExactTail t =
        exact_tails(static_cast<int>(sample_a.size()), static_cast<int>(sample_b.size()),
                    static_cast<int>(std::llround(s.w_a)));
    return {t.p_le, t.p_ge};
}

WilcoxonTails wilcoxon_tails_normal(std::span<const double> sample_a,
                                    std::span<const double> sample_b) {
    check_samples(sample_a, sample_b);
    const RankSummary s = rank_samples(sample_a, sample_b);
    const ApproxTail t = approx_tails(sample_a.size(), sample_b.size(), s.w_a, s.tie_term);
    return {t.p_le, t.p_ge};
}

namespace {

WilcoxonTails select_tails(std::span<const double> sample_a, std::span<const double> sample_b) {
    const RankSummary s = rank_samples(sample_a, sample_b);
    if (sample_a.size() + sample_b.size() <= 20 && !s.has_ties)
        return wilcoxon_tails_exact(sample_a, sample_b);
    return wilcoxon_tails_normal(sample_a, sample_b);
}

} // namespace

double wilcoxon_rank_sum(std::span<const double> sample_a, std::span<const double> sample_b) {
    check_samples(sample_a, sample_b);
    if (all_identical(sample_a, sample_b)) return 1.0;
    const WilcoxonTails t = select_tails(sample_a, sample_b);
    return std::min(1.0, 2.0 * std::min(t.p_le, t.p_ge));
}

double wilcoxon_rank_sum_greater(std::span<const double> sample_a,
                                 std::span<const double> sample_b) {
    check_samples(sample_a, sample_b);
    if (all_identical(sample_a, sample_b)) return 1.0;
    const WilcoxonTails t = select_tails(sample_a, sample_b);
    return std::min(1.0, t.p_ge);
}

std::vector<double> bonferroni(std::span<const double> p_values, int k) {
    if (k < static_cast<int>(p_values.size()))
        throw std::invalid_argument("bonferroni: k must cover all comparisons");
    std::vector<double> out(p_values.size());
    for (std::size_t i = 0; i < p_values.size(); ++i)
        out[i] = std::min(1.0, p_values[i] * static_cast<double>(k));
    return out;
}

} // namespace qdpg

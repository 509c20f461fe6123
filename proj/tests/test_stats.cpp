#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qdpg/rng.hpp"
#include "qdpg/stats.hpp"

using namespace qdpg;

namespace {

// Independent oracle: brute-force enumeration over every rank assignment
// (choose which of the N pooled ranks belong to sample a).
double enumerated_two_sided_p(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size(), total = n + b.size();
    std::vector<double> pool(a.begin(), a.end());
    pool.insert(pool.end(), b.begin(), b.end());
    std::vector<double> sorted = pool;
    std::sort(sorted.begin(), sorted.end());

    double w_obs = 0.0;
    for (double v : a)
        w_obs += static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), v) -
                                     sorted.begin()) +
                 1.0;

    // iterate all subsets of {1..total} of size n via a selection mask
    std::vector<bool> mask(total, false);
    std::fill(mask.begin(), mask.begin() + n, true);
    std::size_t count = 0, le = 0, ge = 0;
    do {
        double w = 0.0;
        for (std::size_t r = 0; r < total; ++r)
            if (mask[r]) w += static_cast<double>(r + 1);
        ++count;
        if (w <= w_obs) ++le;
        if (w >= w_obs) ++ge;
    } while (std::prev_permutation(mask.begin(), mask.end()));

    const double p = 2.0 * std::min(static_cast<double>(le) / count,
                                    static_cast<double>(ge) / count);
    return std::min(1.0, p);
}

std::vector<double> distinct_sample(Rng& rng, std::size_t n, std::vector<double>& used) {
    std::vector<double> out;
    while (out.size() < n) {
        const double v = rng.uniform(-10.0, 10.0);
        if (std::find(used.begin(), used.end(), v) == used.end()) {
            used.push_back(v);
            out.push_back(v);
        }
    }
    return out;
}

} // namespace

TEST_CASE("identical samples give p = 1") {
    const std::vector<double> a{2.0, 2.0, 2.0};
    CHECK(wilcoxon_rank_sum(a, a) == 1.0);
    CHECK(wilcoxon_rank_sum_greater(a, a) == 1.0);
}

TEST_CASE("fully separated 3-vs-3 has exact two-sided p = 0.1") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{10.0, 11.0, 12.0};
    CHECK(wilcoxon_rank_sum(a, b) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(wilcoxon_rank_sum(a, b) == doctest::Approx(enumerated_two_sided_p(a, b)).epsilon(1e-12));
    // one-sided: all 20 assignments, only one puts a's ranks this low
    CHECK(wilcoxon_rank_sum_greater(b, a) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(wilcoxon_rank_sum_greater(a, b) == 1.0);
}

TEST_CASE("exact path agrees with brute-force enumeration on random instances") {
    Rng rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> used;
        const std::size_t na = 2 + rng.uniform_index(5);
        const std::size_t nb = 2 + rng.uniform_index(5);
        const auto a = distinct_sample(rng, na, used);
        const auto b = distinct_sample(rng, nb, used);
        CHECK(wilcoxon_rank_sum(a, b) ==
              doctest::Approx(enumerated_two_sided_p(a, b)).epsilon(1e-10));
    }
}

TEST_CASE("two-sided p is symmetric in its arguments") {
    Rng rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> used;
        const auto a = distinct_sample(rng, 4 + rng.uniform_index(8), used);
        const auto b = distinct_sample(rng, 4 + rng.uniform_index(8), used);
        CHECK(wilcoxon_rank_sum(a, b) == doctest::Approx(wilcoxon_rank_sum(b, a)).epsilon(1e-12));
    }
}

TEST_CASE("disjoint 20-vs-20 samples are detected at p < 1e-6") {
    std::vector<double> a(20), b(20);
    std::iota(a.begin(), a.end(), 0.0);
    std::iota(b.begin(), b.end(), 100.0);
    CHECK(wilcoxon_rank_sum(a, b) < 1e-6); // approximation path (N = 40)
}

TEST_CASE("exact and normal-approximation paths agree within 0.02 on sizes 8-10") {
    Rng rng(83);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> used;
        const std::size_t na = 8 + rng.uniform_index(3);
        const std::size_t nb = 8 + rng.uniform_index(3);
        const auto a = distinct_sample(rng, na, used);
        const auto b = distinct_sample(rng, nb, used);

        const WilcoxonTails exact = wilcoxon_tails_exact(a, b);
        const WilcoxonTails normal = wilcoxon_tails_normal(a, b);
        const double p_exact = std::min(1.0, 2.0 * std::min(exact.p_le, exact.p_ge));
        const double p_normal = std::min(1.0, 2.0 * std::min(normal.p_le, normal.p_ge));
        worst = std::max(worst, std::abs(p_exact - p_normal));
    }
    CHECK(worst < 0.02);
}

TEST_CASE("bonferroni multiplies and clips") {
    const std::vector<double> ps{0.01, 0.5, 0.3};
    const auto adj = bonferroni(ps, 4);
    CHECK(adj[0] == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(adj[1] == 1.0);
    CHECK(adj[2] == doctest::Approx(1.0).epsilon(1e-12));

    const auto same = bonferroni(std::vector<double>{0.2}, 1);
    CHECK(same[0] == doctest::Approx(0.2).epsilon(1e-12));

    CHECK_THROWS_AS(bonferroni(ps, 2), std::invalid_argument);
}

TEST_CASE("empty samples are rejected") {
    const std::vector<double> a{1.0};
    const std::vector<double> none;
    CHECK_THROWS_AS(wilcoxon_rank_sum(a, none), std::invalid_argument);
}

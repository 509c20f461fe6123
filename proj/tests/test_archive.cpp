#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "qdpg/archive.hpp"

using namespace qdpg;

namespace {

std::vector<BdPoint> two_corner_centroids() { return {{0.0, 0.0}, {1.0, 1.0}}; }

ParamVector tiny_genotype(double v) { return ParamVector{v, v, v}; }

} // namespace

TEST_CASE("exact_mean of identical values is bitwise exact") {
    const double v = 0.1234567890123;
    std::vector<double> xs(50, v);
    CHECK(exact_mean(xs) == v);
    CHECK(exact_mean(std::vector<double>{2.0, 4.0}) == 3.0);
}

TEST_CASE("build_cvt with a single centroid returns the sample mean") {
    const auto centroids = build_cvt(2, 1, 2000, 99);
    REQUIRE(centroids.size() == 1);
    // uniform over the unit square: mean near the centre
    CHECK(centroids[0][0] == doctest::Approx(0.5).epsilon(0.05));
    CHECK(centroids[0][1] == doctest::Approx(0.5).epsilon(0.05));

    // and exactly equal to the independently accumulated mean of the samples
    Rng rng(99);
    double sx = 0, sy = 0;
    for (int i = 0; i < 2000; ++i) {
        sx += rng.uniform();
        sy += rng.uniform();
    }
    CHECK(centroids[0][0] == doctest::Approx(sx / 2000).epsilon(1e-12));
    CHECK(centroids[0][1] == doctest::Approx(sy / 2000).epsilon(1e-12));
}

TEST_CASE("degenerate cvt instance returns the samples themselves") {
    const int k = 32;
    const auto centroids = build_cvt(3, k, k, 7);
    REQUIRE(centroids.size() == k);
    Rng rng(7);
    for (int i = 0; i < k; ++i)
        for (int d = 0; d < 3; ++d) CHECK(centroids[i][d] == rng.uniform());
}

TEST_CASE("cvt centroids stay inside the unit hypercube") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto centroids = build_cvt(2, 64, 2048, seed);
        for (const auto& c : centroids)
            for (double x : c) {
                CHECK(x >= 0.0);
                CHECK(x <= 1.0);
            }
    }
}

TEST_CASE("build_cvt is deterministic") {
    CHECK(build_cvt(2, 16, 512, 5) == build_cvt(2, 16, 512, 5));
}

TEST_CASE("cell_index picks the nearest centroid, ties break low") {
    CvtArchive archive(two_corner_centroids());
    CHECK(archive.cell_index({0.1, 0.1}) == 0);
    CHECK(archive.cell_index({0.9, 0.9}) == 1);
    CHECK(archive.cell_index({0.5, 0.5}) == 0); // exact tie

    CvtArchive single(std::vector<BdPoint>{{0.3, 0.3}});
    CHECK(single.cell_index({0.99, 0.0}) == 0);
}

TEST_CASE("try_add implements strict elitism") {
    CvtArchive archive(two_corner_centroids());
    CHECK(archive.try_add(tiny_genotype(1), 3.0, {0.1, 0.1}, 1) == AddOutcome::NewCell);
    CHECK(archive.try_add(tiny_genotype(2), 5.0, {0.2, 0.1}, 2) == AddOutcome::Improved);
    CHECK(archive.try_add(tiny_genotype(3), 5.0, {0.1, 0.2}, 3) == AddOutcome::Rejected);
    CHECK(archive.cells().at(0).fitness == 5.0);
    CHECK(archive.cells().at(0).genotype == tiny_genotype(2));
    CHECK(archive.n_occupied() == 1);

    // non-finite fitness is rejected and counted
    CHECK(archive.try_add(tiny_genotype(4), std::nan(""), {0.9, 0.9}, 4) == AddOutcome::Rejected);
    CHECK(archive.rejected_nonfinite() == 1);
    CHECK(archive.n_occupied() == 1);
}

TEST_CASE("stored elites re-derive their own cell") {
    Rng rng(13);
    const auto centroids = build_cvt(2, 32, 1024, 21);
    CvtArchive archive(centroids);
    for (int i = 0; i < 200; ++i) {
        BdPoint bd{rng.uniform(), rng.uniform()};
        archive.try_add(tiny_genotype(i), rng.uniform(-1.0, 1.0), bd, i);
    }
    for (const auto& [cell, elite] : archive.cells()) CHECK(archive.cell_index(elite.bd) == cell);
}

TEST_CASE("coverage and per-cell fitness never decrease under try_add") {
    Rng rng(31);
    CvtArchive archive(build_cvt(2, 16, 512, 2));
    std::size_t last_occupied = 0;
    std::map<int, double> best;
    for (int i = 0; i < 300; ++i) {
        BdPoint bd{rng.uniform(), rng.uniform()};
        archive.try_add(tiny_genotype(i), rng.normal(), bd, i);
        CHECK(archive.n_occupied() >= last_occupied);
        last_occupied = archive.n_occupied();
        for (const auto& [cell, elite] : archive.cells()) {
            auto it = best.find(cell);
            if (it != best.end()) CHECK(elite.fitness >= it->second);
            best[cell] = elite.fitness;
        }
    }
}

TEST_CASE("uniform_select on a single-elite archive repeats that elite") {
    CvtArchive archive(two_corner_centroids());
    archive.try_add(tiny_genotype(7), 1.0, {0.1, 0.1}, 1);
    Rng rng(1);
    const auto picked = archive.uniform_select(3, rng);
    REQUIRE(picked.size() == 3);
    for (const Elite* e : picked) CHECK(e->genotype == tiny_genotype(7));
}

TEST_CASE("uniform_select is empirically uniform over occupied cells") {
    // 10 occupied cells at distinct spots
    std::vector<BdPoint> centroids;
    for (int i = 0; i < 10; ++i) centroids.push_back({0.05 + 0.1 * i, 0.5});
    CvtArchive archive(centroids);
    for (int i = 0; i < 10; ++i)
        archive.try_add(tiny_genotype(i), double(i), {0.05 + 0.1 * i, 0.5}, i);

    Rng rng(12345);
    const int n = 100000;
    std::map<double, int> counts;
    for (const Elite* e : archive.uniform_select(n, rng)) counts[e->fitness] += 1;

    // binomial 3-sigma envelope around n/10
    const double expected = n / 10.0;
    const double sigma = std::sqrt(n * 0.1 * 0.9);
    REQUIRE(counts.size() == 10);
    for (const auto& [fit, c] : counts) CHECK(std::abs(c - expected) <= 3.0 * sigma);
}

TEST_CASE("uniform_select is deterministic per seed and errors when empty") {
    CvtArchive archive(two_corner_centroids());
    Rng rng(3);
    CHECK_THROWS_AS(archive.uniform_select(1, rng), std::runtime_error);

    for (int i = 0; i < 2; ++i)
        archive.try_add(tiny_genotype(i), double(i), {double(i), double(i)}, i);
    Rng r1(77), r2(77);
    const auto a = archive.uniform_select(50, r1);
    const auto b = archive.uniform_select(50, r2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("deep cell capacity keeps the newest entry") {
    Rng rng(9);
    DeepCell cell;
    for (int i = 0; i < 3; ++i)
        deep_cell_add(cell, DeepEntry{tiny_genotype(i), double(i), {0.5, 0.5}}, 2, rng);
    CHECK(cell.entries.size() == 2);
    bool newest_present = false;
    for (const auto& e : cell.entries) newest_present |= e.fitness == 2.0;
    CHECK(newest_present);
}

TEST_CASE("deep cell below capacity keeps everything") {
    Rng rng(10);
    DeepCell cell;
    for (int i = 0; i < 10; ++i)
        deep_cell_add(cell, DeepEntry{tiny_genotype(i), double(i), {0.5, 0.5}}, 50, rng);
    CHECK(cell.entries.size() == 10);
}

TEST_CASE("deep cell eviction is deterministic under a fixed seed") {
    auto run = [] {
        Rng rng(42);
        DeepCell cell;
        for (int i = 0; i < 30; ++i)
            deep_cell_add(cell, DeepEntry{tiny_genotype(i), double(i), {0.5, 0.5}}, 5, rng);
        std::vector<double> fits;
        for (const auto& e : cell.entries) fits.push_back(e.fitness);
        return fits;
    };
    CHECK(run() == run());
}

TEST_CASE("deep cell selection returns a member and the mean fitness") {
    Rng rng(8);
    DeepCell cell;
    deep_cell_add(cell, DeepEntry{tiny_genotype(0), 4.0, {0.5, 0.5}}, 50, rng);
    auto [entry, score] = deep_cell_select(cell, rng);
    CHECK(entry->fitness == 4.0);
    CHECK(score == 4.0);

    deep_cell_add(cell, DeepEntry{tiny_genotype(1), 2.0, {0.5, 0.5}}, 50, rng);
    CHECK(deep_cell_select(cell, rng).second == 3.0);

    DeepCell uniform_cell;
    for (int i = 0; i < 50; ++i)
        deep_cell_add(uniform_cell, DeepEntry{tiny_genotype(i), 1.25, {0.5, 0.5}}, 50, rng);
    CHECK(deep_cell_select(uniform_cell, rng).second == 1.25);

    DeepCell empty;
    CHECK_THROWS_AS(deep_cell_select(empty, rng), std::runtime_error);
}

TEST_CASE("deep grid archive routes by nearest centroid and reports per-cell best") {
    Rng rng(6);
    DeepGridArchive grid(two_corner_centroids(), 3);
    grid.add(tiny_genotype(0), 1.0, {0.1, 0.0}, rng);
    grid.add(tiny_genotype(1), 5.0, {0.0, 0.1}, rng);
    grid.add(tiny_genotype(2), 3.0, {0.9, 1.0}, rng);
    CHECK(grid.n_occupied() == 2);
    CHECK(grid.cells().at(0).entries.size() == 2);

    const CvtArchive reported = grid.reported();
    CHECK(reported.cells().at(0).fitness == 5.0);
    CHECK(reported.cells().at(1).fitness == 3.0);
}

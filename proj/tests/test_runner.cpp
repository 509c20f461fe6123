#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdpg/io.hpp"
#include "qdpg/runner.hpp"

using namespace qdpg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "qdpg_runner_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    const fs::path file = dir / "config.ini";
    std::ofstream out(file);
    out << body;
    return file;
}

const char* kSmallConfig = R"(# small uncertain pointnav experiment
[run]
task = pointnav
uncertain = true
algorithm = map_elites
master_seed = 5
n_replications = 2
eval_budget = 120
correct_reevals = 4

[archive]
n_centroids = 16
cvt_samples = 320

[loop]
batch_size = 10
n_init_episodes = 20

[network]
actor_hidden = 4,4
critic_hidden = 8,8

[variation]
proportion_ga = 0.5
n_act = 2
pg_batch = 8

[td3]
train_batch = 8
)";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config loading rejects malformed input with line-precise messages") {
    const fs::path dir = scratch_dir("config_errors");

    SUBCASE("missing required field names the field") {
        const fs::path file = write_config(dir, "[run]\ntask = pointnav\n");
        try {
            load_run_config(file);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("algorithm") != std::string::npos);
        }
    }

    SUBCASE("unknown keys are flagged with their line") {
        const fs::path file = write_config(
            dir,
            "[run]\ntask = pointnav\nalgorithm = map_elites\neval_budget = 100\n"
            "master_seed = 1\nn_replications = 1\nbogus_key = 3\n");
        try {
            load_run_config(file);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("bogus_key") != std::string::npos);
            CHECK(msg.find(":7") != std::string::npos);
        }
    }

    SUBCASE("bad values carry the offending line") {
        const fs::path file = write_config(
            dir,
            "[run]\ntask = pointnav\nalgorithm = map_elites\neval_budget = lots\n"
            "master_seed = 1\nn_replications = 1\n");
        try {
            load_run_config(file);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("eval_budget") != std::string::npos);
            CHECK(msg.find(":4") != std::string::npos);
        }
    }

    SUBCASE("a well-formed config parses with defaults applied") {
        const fs::path file = write_config(dir, kSmallConfig);
        const RunConfig cfg = load_run_config(file);
        CHECK(cfg.task == "pointnav");
        CHECK(cfg.uncertain);
        CHECK(cfg.n_replications == 2);
        CHECK(cfg.algo.variation.batch_size == 10);
        CHECK(cfg.algo.td3.gamma == 0.99);        // paper default untouched
        CHECK(cfg.algo.variation.sigma1 == 0.005); // paper default untouched
        CHECK(cfg.correct_reevals == 4);
    }
}

TEST_CASE("experiments rerun byte-identically under one master seed") {
    const fs::path dir = scratch_dir("determinism");
    const fs::path file = write_config(dir, kSmallConfig);
    RunConfig cfg = load_run_config(file);

    REQUIRE(run_experiment(cfg, dir / "a") == 0);
    REQUIRE(run_experiment(cfg, dir / "b") == 0);

    const std::vector<std::string> files{
        "centroids.csv",      "summary.csv",          "manifest.txt",
        "rep_000/metrics.csv", "rep_000/operators.csv", "rep_000/archive.csv",
        "rep_000/genotypes.bin", "rep_000/corrected.csv", "rep_001/metrics.csv",
        "rep_001/archive.csv",
    };
    for (const auto& f : files) {
        INFO("file ", f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
}

TEST_CASE("summary medians interpolate across replications") {
    // direct check of the quantile helper against hand values
    CHECK(quantile({1.0, 2.0, 3.0}, 0.5) == 2.0);
    CHECK(quantile({3.0, 1.0}, 0.5) == 2.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == 1.75);
    CHECK(quantile({5.0}, 0.75) == 5.0);
}

TEST_CASE("the archive dump round-trips") {
    const fs::path dir = scratch_dir("dump");
    Rng rng(3);
    const auto centroids = build_cvt(2, 8, 160, 9);
    CvtArchive archive(centroids);
    MlpSpec actor = MlpSpec::actor(4, {4}, 2);
    for (int i = 0; i < 12; ++i) {
        ParamVector g = random_params(actor, rng);
        archive.try_add(g, rng.normal(), {rng.uniform(), rng.uniform()}, i);
    }
    dump_archive(archive, dir);
    const CvtArchive loaded = load_archive(dir, centroids);
    REQUIRE(loaded.n_occupied() == archive.n_occupied());
    for (const auto& [cell, elite] : archive.cells()) {
        const Elite& l = loaded.cells().at(cell);
        CHECK(l.fitness == elite.fitness);
        CHECK(l.bd == elite.bd);
        CHECK(l.genotype == elite.genotype);
    }
}

TEST_CASE("the correct subcommand reproduces the in-run corrected report") {
    const fs::path dir = scratch_dir("correct");
    const fs::path file = write_config(dir, kSmallConfig);
    RunConfig cfg = load_run_config(file);
    cfg.n_replications = 1;
    REQUIRE(run_experiment(cfg, dir / "exp") == 0);

    const std::string in_run = slurp(dir / "exp/rep_000/corrected.csv");
    REQUIRE(run_correction(dir / "exp/rep_000", cfg.correct_reevals) == 0);
    CHECK(slurp(dir / "exp/rep_000/corrected.csv") == in_run);
}

TEST_CASE("ablation at proportion 1 reproduces the map-elites experiment") {
    const fs::path dir = scratch_dir("ablation");
    const fs::path file = write_config(dir, kSmallConfig);
    RunConfig cfg = load_run_config(file);
    cfg.correct_reevals = 0; // keep it quick

    REQUIRE(run_ablation(cfg, {1.0, 0.5}, dir / "abl") == 0);
    REQUIRE(run_experiment(cfg, dir / "me") == 0); // same seeds, map_elites

    for (const char* f : {"rep_000/metrics.csv", "rep_000/operators.csv", "rep_000/archive.csv",
                          "rep_000/genotypes.bin", "rep_001/metrics.csv"}) {
        INFO("file ", f);
        CHECK(slurp(dir / "abl/prop_1" / f) == slurp(dir / "me" / f));
    }
    CHECK(fs::exists(dir / "abl/prop_0.5/rep_001/metrics.csv"));
    CHECK(fs::exists(dir / "abl/ablation_summary.csv"));
    CHECK(fs::exists(dir / "abl/stats.csv"));

    // stats.csv has one row per proportion pair per metric
    std::ifstream stats(dir / "abl/stats.csv");
    std::string line;
    int rows = 0;
    while (std::getline(stats, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 1 + 2); // header + one pairing x two metrics
}

TEST_CASE("paired ablation seeds share the init-phase evaluation stream") {
    const fs::path dir = scratch_dir("paired");
    const fs::path file = write_config(dir, kSmallConfig);
    RunConfig cfg = load_run_config(file);
    cfg.correct_reevals = 0;
    REQUIRE(run_ablation(cfg, {0.0, 1.0}, dir / "abl") == 0);

    // generation 0 is random init in both arms: identical rows prove the
    // shared episode-seed stream
    auto first_rows = [&](const fs::path& p) {
        std::ifstream in(p);
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        return row;
    };
    CHECK(first_rows(dir / "abl/prop_0/rep_000/metrics.csv") ==
          first_rows(dir / "abl/prop_1/rep_000/metrics.csv"));
}

TEST_CASE("manifests list every emitted file with a hash") {
    const fs::path dir = scratch_dir("manifest");
    const fs::path file = write_config(dir, kSmallConfig);
    RunConfig cfg = load_run_config(file);
    cfg.n_replications = 1;
    REQUIRE(run_experiment(cfg, dir / "exp") == 0);

    const std::string manifest = slurp(dir / "exp/manifest.txt");
    CHECK(manifest.find("status=complete") == 0);
    for (const char* f : {"centroids.csv", "summary.csv", "rep_000/metrics.csv",
                          "rep_000/operators.csv", "rep_000/archive.csv",
                          "rep_000/genotypes.bin", "rep_000/corrected.csv"})
        CHECK(manifest.find(f) != std::string::npos);
}

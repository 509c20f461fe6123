#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdpg/config.hpp"
#include "qdpg/runner.hpp"

namespace {

std::vector<double> parse_proportions(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("no proportions given");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quality-diversity neuroevolution runner (PGA-MAP-Elites and baselines)"};
    app.require_subcommand(1);

    std::string config_path, out_dir, archive_dir, proportions_csv = "0,0.25,0.5,0.75,1";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int reevals = 50;

    CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("--config", config_path, "config file path")->required();
    run->add_option("--seed", seed, "override master_seed")->each([&](const std::string&) {
        seed_set = true;
    });
    run->add_option("--out", out_dir, "output directory (overrides config out_dir)");

    CLI::App* ablate = app.add_subcommand("ablate", "sweep the GA/PG proportion");
    ablate->add_option("--config", config_path, "config file path")->required();
    ablate->add_option("--proportions", proportions_csv, "comma-separated proportions");
    ablate->add_option("--seed", seed, "override master_seed")->each([&](const std::string&) {
        seed_set = true;
    });
    ablate->add_option("--out", out_dir, "output directory (overrides config out_dir)");

    CLI::App* correct = app.add_subcommand("correct", "recompute a replication's corrected report");
    correct->add_option("--archive", archive_dir, "replication directory (rep_###)")->required();
    correct->add_option("--reevals", reevals, "re-evaluations per elite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (correct->parsed()) return qdpg::run_correction(archive_dir, reevals);

        qdpg::RunConfig cfg = qdpg::load_run_config(config_path);
        if (seed_set) cfg.master_seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (cfg.out_dir.empty()) {
            std::cerr << "no output directory: set out_dir in the config or pass --out\n";
            return 1;
        }
        if (run->parsed()) return qdpg::run_experiment(cfg, cfg.out_dir);
        return qdpg::run_ablation(cfg, parse_proportions(proportions_csv), cfg.out_dir);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
}

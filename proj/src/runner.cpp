#include "qdpg/runner.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "qdpg/io.hpp"
#include "qdpg/metrics.hpp"
#include "qdpg/stats.hpp"

namespace qdpg {

namespace fs = std::filesystem;

std::uint64_t replication_seed(std::uint64_t master_seed, int replication) {
    return master_seed + static_cast<std::uint64_t>(replication);
}

namespace {

std::string rep_dir_name(int rep) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "rep_%03d", rep);
    return buf;
}

std::string int_list_to_string(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

void write_run_info(const fs::path& file, const RunConfig& cfg, int rep,
                    std::uint64_t rep_seed) {
    std::ofstream out(file, std::ios::binary);
    out << "task=" << cfg.task << '\n'
        << "uncertain=" << (cfg.uncertain ? "true" : "false") << '\n'
        << "algorithm=" << algorithm_name(cfg.algo.algorithm) << '\n'
        << "replication=" << rep << '\n'
        << "rep_seed=" << rep_seed << '\n'
        << "actor_hidden=" << int_list_to_string(cfg.algo.actor_hidden) << '\n';
}

std::map<std::string, std::string> read_kv_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

void write_corrected_csv(const fs::path& file, int run_id, const CorrectedReport& r) {
    CsvWriter csv(file, {"run_id", "metric", "original", "corrected", "loss"});
    const auto row = [&](const char* name, double orig, double corr, double loss) {
        csv.row({std::to_string(run_id), name, fmt_double(orig), fmt_double(corr),
                 fmt_double(loss)});
    };
    row("qd_score", r.original.qd_score, r.corrected.qd_score, r.qd_score_loss);
    row("max_fitness", r.original.max_fitness, r.corrected.max_fitness, r.max_fitness_loss);
    row("coverage", r.original.coverage, r.corrected.coverage, r.coverage_loss);
}

struct ExperimentOutput {
    std::vector<std::vector<RunRecord>> per_rep_records;
    std::vector<MetricSet> final_metrics;
};

ExperimentOutput execute_experiment(const RunConfig& cfg, const fs::path& out_dir,
                                    std::vector<std::string>& files) {
    fs::create_directories(out_dir);
    const auto task = make_task(cfg.task, cfg.uncertain);
    const int samples = cfg.cvt_samples > 0 ? cfg.cvt_samples : 20 * cfg.n_centroids;
    const auto centroids = build_cvt(task->spec().bd_dim, cfg.n_centroids, samples,
                                     derive_seed(cfg.master_seed, stream::kCvt));
    write_centroids(out_dir / "centroids.csv", centroids);
    files.push_back("centroids.csv");

    ExperimentOutput output;
    for (int rep = 0; rep < cfg.n_replications; ++rep) {
        const std::uint64_t rep_seed = replication_seed(cfg.master_seed, rep);
        const std::string rep_name = rep_dir_name(rep);
        const fs::path rep_dir = out_dir / rep_name;
        fs::create_directories(rep_dir);

        const RunResult result = run_algorithm(cfg.algo, *task, centroids, rep_seed);

        write_metrics_csv(rep_dir / "metrics.csv", result.records);
        files.push_back(rep_name + "/metrics.csv");
        write_operators_csv(rep_dir / "operators.csv", result.records);
        files.push_back(rep_name + "/operators.csv");
        dump_archive(result.archive, rep_dir);
        files.push_back(rep_name + "/archive.csv");
        files.push_back(rep_name + "/genotypes.bin");
        write_centroids(rep_dir / "centroids.csv", centroids);
        files.push_back(rep_name + "/centroids.csv");
        write_run_info(rep_dir / "run_info.txt", cfg, rep, rep_seed);
        files.push_back(rep_name + "/run_info.txt");
        if (!result.critic_log.empty()) {
            write_critic_log_csv(rep_dir / "critic_log.csv", result.critic_log);
            files.push_back(rep_name + "/critic_log.csv");
        }
        if (cfg.correct_reevals > 0) {
            const CorrectedReport report =
                corrected_report(result.archive, *task, result.actor_spec, cfg.correct_reevals,
                                 derive_seed(rep_seed, stream::kCorrection));
            write_corrected_csv(rep_dir / "corrected.csv", rep, report);
            files.push_back(rep_name + "/corrected.csv");
        }
        output.final_metrics.push_back(
            compute_metrics(result.archive, task->spec().fitness_floor));
        output.per_rep_records.push_back(result.records);
    }

    // cross-replication summary (median / quartiles per generation)
    const std::size_t n_gens = output.per_rep_records.front().size();
    for (const auto& records : output.per_rep_records)
        if (records.size() != n_gens)
            throw std::runtime_error("replications disagree on generation count");
    CsvWriter summary(out_dir / "summary.csv",
                      {"generation", "evaluations", "qd_score_median", "qd_score_q1",
                       "qd_score_q3", "coverage_median", "coverage_q1", "coverage_q3",
                       "max_fitness_median", "max_fitness_q1", "max_fitness_q3"});
    files.push_back("summary.csv");
    std::vector<double> qd, cov, best;
    for (std::size_t g = 0; g < n_gens; ++g) {
        qd.clear();
        cov.clear();
        best.clear();
        for (const auto& records : output.per_rep_records) {
            qd.push_back(records[g].qd_score);
            cov.push_back(records[g].coverage);
            best.push_back(records[g].max_fitness);
        }
        const RunRecord& r0 = output.per_rep_records.front()[g];
        summary.row({std::to_string(r0.generation), std::to_string(r0.evaluations),
                     fmt_double(quantile(qd, 0.5)), fmt_double(quantile(qd, 0.25)),
                     fmt_double(quantile(qd, 0.75)), fmt_double(quantile(cov, 0.5)),
                     fmt_double(quantile(cov, 0.25)), fmt_double(quantile(cov, 0.75)),
                     fmt_double(quantile(best, 0.5)), fmt_double(quantile(best, 0.25)),
                     fmt_double(quantile(best, 0.75))});
    }
    return output;
}

} // namespace

int run_experiment(const RunConfig& cfg, const fs::path& out_dir) {
    std::vector<std::string> files;
    try {
        execute_experiment(cfg, out_dir, files);
        write_manifest(out_dir, files, true);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "experiment failed: " << e.what() << '\n';
        if (fs::exists(out_dir)) write_manifest(out_dir, files, false, e.what());
        return 1;
    }
}

int run_ablation(const RunConfig& cfg, const std::vector<double>& proportions,
                 const fs::path& out_dir) {
    std::vector<std::string> files;
    try {
        for (double p : proportions)
            if (p < 0.0 || p > 1.0)
                throw std::invalid_argument("ablation proportions must lie in [0,1]");
        fs::create_directories(out_dir);

        struct Arm {
            std::string label;
            ExperimentOutput output;
        };
        std::vector<Arm> arms;
        for (double p : proportions) {
            RunConfig sub = cfg;
            sub.algo.algorithm = Algorithm::PgaMapElites;
            sub.algo.variation.proportion_ga = p; // replication seeds stay shared
            const std::string label = fmt_double(p);
            const std::string sub_name = "prop_" + label;
            std::vector<std::string> sub_files;
            const ExperimentOutput out = execute_experiment(sub, out_dir / sub_name, sub_files);
            write_manifest(out_dir / sub_name, sub_files, true);
            for (const auto& f : sub_files) files.push_back(sub_name + "/" + f);
            files.push_back(sub_name + "/manifest.txt");
            arms.push_back(Arm{label, out});
        }

        CsvWriter joint(out_dir / "ablation_summary.csv",
                        {"proportion_ga", "generation", "evaluations", "qd_score_median",
                         "coverage_median", "max_fitness_median"});
        files.push_back("ablation_summary.csv");
        for (const auto& arm : arms) {
            const auto& reps = arm.output.per_rep_records;
            std::vector<double> qd, cov, best;
            for (std::size_t g = 0; g < reps.front().size(); ++g) {
                qd.clear();
                cov.clear();
                best.clear();
                for (const auto& records : reps) {
                    qd.push_back(records[g].qd_score);
                    cov.push_back(records[g].coverage);
                    best.push_back(records[g].max_fitness);
                }
                joint.row({arm.label, std::to_string(reps.front()[g].generation),
                           std::to_string(reps.front()[g].evaluations),
                           fmt_double(quantile(qd, 0.5)), fmt_double(quantile(cov, 0.5)),
                           fmt_double(quantile(best, 0.5))});
            }
        }

        // pairwise comparisons on the final per-replication metrics
        struct StatRow {
            std::string pairing, metric;
            double raw_p;
        };
        std::vector<StatRow> rows;
        const auto finals = [&](const Arm& arm, auto proj) {
            std::vector<double> v;
            for (const auto& m : arm.output.final_metrics) v.push_back(proj(m));
            return v;
        };
        for (std::size_t i = 0; i < arms.size(); ++i) {
            for (std::size_t j = i + 1; j < arms.size(); ++j) {
                const std::string pairing = arms[i].label + "_vs_" + arms[j].label;
                const auto qd_i = finals(arms[i], [](const MetricSet& m) { return m.qd_score; });
                const auto qd_j = finals(arms[j], [](const MetricSet& m) { return m.qd_score; });
                rows.push_back({pairing, "qd_score", wilcoxon_rank_sum(qd_i, qd_j)});
                const auto mf_i =
                    finals(arms[i], [](const MetricSet& m) { return m.max_fitness; });
                const auto mf_j =
                    finals(arms[j], [](const MetricSet& m) { return m.max_fitness; });
                rows.push_back({pairing, "max_fitness", wilcoxon_rank_sum(mf_i, mf_j)});
            }
        }
        std::vector<double> raw;
        for (const auto& r : rows) raw.push_back(r.raw_p);
        const auto adjusted = raw.empty()
                                  ? std::vector<double>{}
                                  : bonferroni(raw, static_cast<int>(raw.size()));
        CsvWriter stats(out_dir / "stats.csv", {"pairing", "metric", "raw_p", "bonferroni_p"});
        files.push_back("stats.csv");
        for (std::size_t i = 0; i < rows.size(); ++i)
            stats.row({rows[i].pairing, rows[i].metric, fmt_double(rows[i].raw_p),
                       fmt_double(adjusted[i])});

        write_manifest(out_dir, files, true);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "ablation failed: " << e.what() << '\n';
        if (fs::exists(out_dir)) write_manifest(out_dir, files, false, e.what());
        return 1;
    }
}

int run_correction(const fs::path& rep_dir, int n_reeval) {
    try {
        const auto info = read_kv_file(rep_dir / "run_info.txt");
        const auto need = [&](const std::string& key) {
            auto it = info.find(key);
            if (it == info.end())
                throw std::runtime_error("run_info.txt: missing key '" + key + "'");
            return it->second;
        };
        const auto task = make_task(need("task"), need("uncertain") == "true");
        std::vector<int> hidden;
        {
            std::string list = need("actor_hidden");
            std::size_t pos = 0;
            while (pos != std::string::npos) {
                const auto comma = list.find(',', pos);
                hidden.push_back(std::stoi(list.substr(pos, comma - pos)));
                pos = comma == std::string::npos ? comma : comma + 1;
            }
        }
        const MlpSpec actor_spec =
            MlpSpec::actor(task->spec().obs_dim, hidden, task->spec().act_dim);
        const std::uint64_t rep_seed = std::stoull(need("rep_seed"));
        const int rep = std::stoi(need("replication"));

        const auto centroids = read_centroids(rep_dir / "centroids.csv");
        const CvtArchive archive = load_archive(rep_dir, centroids);
        const CorrectedReport report = corrected_report(
            archive, *task, actor_spec, n_reeval, derive_seed(rep_seed, stream::kCorrection));
        write_corrected_csv(rep_dir / "corrected.csv", rep, report);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "correction failed: " << e.what() << '\n';
        return 1;
    }
}

} // namespace qdpg

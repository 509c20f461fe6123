#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdpg/archive.hpp"
#include "qdpg/envs.hpp"
#include "qdpg/td3.hpp"
#include "qdpg/variation.hpp"

namespace qdpg {

enum class Algorithm { PgaMapElites, MapElites, MapElitesSampling, DeepGrid, Td3Passive };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm algo);

enum class OperatorKind { Init, Ga, Pg, Greedy };
const char* operator_name(OperatorKind op);

/// Named sub-stream tags; every run derives its generators from the run seed
/// through these so that, e.g., critic training never perturbs variation or
/// evaluation randomness.
namespace stream {
constexpr std::uint64_t kInit = 1;      // random genotypes of the init phase
constexpr std::uint64_t kVariation = 2; // parent selection + GA/PG draws
constexpr std::uint64_t kEval = 3;      // episode seeds
constexpr std::uint64_t kTraining = 4;  // network init, batches, noise
constexpr std::uint64_t kCvt = 5;       // centroid construction
constexpr std::uint64_t kCorrection = 6; // corrected-archive re-evaluations
} // namespace stream

struct AlgoConfig {
    Algorithm algorithm = Algorithm::PgaMapElites;
    std::int64_t eval_budget = 0;
    int n_init_episodes = 500; // I, in evaluations
    int n_crit = 300;          // critic training steps per generation
    int sampling_m = 10;       // M, evaluations per offspring (sampling)
    int deep_depth = 50;       // D, entries per deep-grid cell
    int td3_warmup_steps = 2500;
    std::size_t replay_capacity = 1000000;
    std::vector<int> actor_hidden{32, 32};
    std::vector<int> critic_hidden{64, 64};
    Td3Config td3;
    VariationConfig variation; // holds the batch size b
};

struct RunRecord {
    std::int64_t generation = 0;
    std::int64_t evaluations = 0; // cumulative
    double qd_score = 0.0;
    double coverage = 0.0;
    double max_fitness = 0.0;
    std::int64_t added_init = 0;
    std::int64_t added_ga = 0;
    std::int64_t added_pg = 0;
    std::int64_t added_greedy = 0;
};

struct CriticLogEntry {
    std::int64_t step = 0;
    double loss = 0.0;
};

struct OffspringOutcome {
    OperatorKind op = OperatorKind::Init;
    AddOutcome outcome = AddOutcome::Rejected;
};

struct OperatorCounts {
    std::int64_t init = 0, ga = 0, pg = 0, greedy = 0;
};

/// Additions (NewCell or Improved) attributed to each operator.
OperatorCounts count_additions(std::span<const OffspringOutcome> generation_log);

struct RunResult {
    CvtArchive archive; // deep-grid: best entry per cell
    std::vector<RunRecord> records;
    std::vector<CriticLogEntry> critic_log;
    ParamVector final_greedy; // TD3/PGA greedy actor; empty for GA-only runs
    MlpSpec actor_spec;
    std::int64_t evaluations = 0;
};

RunResult run_pga(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                  std::uint64_t run_seed);
RunResult run_map_elites(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                         std::uint64_t run_seed);
RunResult run_map_elites_sampling(const AlgoConfig& cfg, const Task& task,
                                  std::vector<BdPoint> centroids, std::uint64_t run_seed);
RunResult run_deep_grid(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                        std::uint64_t run_seed);
RunResult run_td3_passive(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                          std::uint64_t run_seed);

/// Dispatch on cfg.algorithm.
RunResult run_algorithm(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                        std::uint64_t run_seed);

} // namespace qdpg

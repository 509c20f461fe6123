#include "qdpg/loop.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "qdpg/metrics.hpp"

namespace qdpg {

Algorithm parse_algorithm(const std::string& name) {
    if (name == "pga_map_elites") return Algorithm::PgaMapElites;
    if (name == "map_elites") return Algorithm::MapElites;
    if (name == "map_elites_sampling") return Algorithm::MapElitesSampling;
    if (name == "deep_grid") return Algorithm::DeepGrid;
    if (name == "td3_passive") return Algorithm::Td3Passive;
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm algo) {
    switch (algo) {
    case Algorithm::PgaMapElites: return "pga_map_elites";
    case Algorithm::MapElites: return "map_elites";
    case Algorithm::MapElitesSampling: return "map_elites_sampling";
    case Algorithm::DeepGrid: return "deep_grid";
    case Algorithm::Td3Passive: return "td3_passive";
    }
    return "unknown";
}

const char* operator_name(OperatorKind op) {
    switch (op) {
    case OperatorKind::Init: return "init";
    case OperatorKind::Ga: return "ga";
    case OperatorKind::Pg: return "pg";
    case OperatorKind::Greedy: return "greedy";
    }
    return "unknown";
}

OperatorCounts count_additions(std::span<const OffspringOutcome> generation_log) {
    OperatorCounts counts;
    for (const auto& entry : generation_log) {
        if (entry.outcome == AddOutcome::Rejected) continue;
        switch (entry.op) {
        case OperatorKind::Init: ++counts.init; break;
        case OperatorKind::Ga: ++counts.ga; break;
        case OperatorKind::Pg: ++counts.pg; break;
        case OperatorKind::Greedy: ++counts.greedy; break;
        }
    }
    return counts;
}

namespace {

// Shared machinery of the generation-based algorithms (everything except the
// per-timestep TD3 baseline).
class QdLoop {
public:
    QdLoop(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
           std::uint64_t run_seed)
        : cfg_(cfg),
          task_(task),
          init_rng_(derive_seed(run_seed, stream::kInit)),
          var_rng_(derive_seed(run_seed, stream::kVariation)),
          eval_rng_(derive_seed(run_seed, stream::kEval)),
          train_rng_(derive_seed(run_seed, stream::kTraining)),
          actor_spec_(MlpSpec::actor(task.spec().obs_dim, cfg.actor_hidden, task.spec().act_dim)),
          archive_(centroids) {
        if (cfg_.eval_budget < cfg_.variation.batch_size)
            throw std::invalid_argument("eval_budget must cover at least one batch");
        if (cfg_.algorithm == Algorithm::DeepGrid)
            deep_.emplace(std::move(centroids), cfg_.deep_depth);
        if (cfg_.algorithm == Algorithm::PgaMapElites) {
            ensemble_.emplace(
                actor_spec_,
                MlpSpec::critic(task.spec().obs_dim, task.spec().act_dim, cfg_.critic_hidden),
                train_rng_);
            buffer_.emplace(task.spec().obs_dim, task.spec().act_dim, cfg_.replay_capacity);
        }
    }

    RunResult run() {
        while (evals_ < cfg_.eval_budget) generation();
        RunResult result{deep_ ? deep_->reported() : std::move(archive_),
                         std::move(records_),
                         std::move(critic_log_),
                         ensemble_ ? ensemble_->greedy() : ParamVector{},
                         actor_spec_,
                         evals_};
        return result;
    }

private:
    void generation() {
        const int b = cfg_.variation.batch_size;
        const int m = cfg_.algorithm == Algorithm::MapElitesSampling ? cfg_.sampling_m : 1;
        const bool init_phase = evals_ < cfg_.n_init_episodes;

        std::vector<ParamVector> offspring(b);
        std::vector<OperatorKind> ops(b, OperatorKind::Init);
        if (init_phase) {
            for (auto& child : offspring) child = random_params(actor_spec_, init_rng_);
        } else {
            if (cfg_.algorithm == Algorithm::PgaMapElites) train_networks();
            produce_offspring(offspring, ops);
        }

        // pre-assigned episode seeds keep evaluation order-independent
        std::vector<std::uint64_t> seeds(static_cast<std::size_t>(b) * m);
        for (auto& s : seeds) s = eval_rng_.next_u64();
        std::vector<EvalResult> evals(seeds.size());
        for (std::size_t i = 0; i < seeds.size(); ++i)
            evals[i] = evaluate(task_, actor_spec_, offspring[i / m], seeds[i]);

        if (buffer_)
            for (const auto& res : evals)
                for (const auto& t : res.transitions) buffer_->push(t);

        std::vector<OffspringOutcome> outcomes(b);
        std::vector<double> fits(m);
        std::vector<std::vector<double>> bds(task_.spec().bd_dim, std::vector<double>(m));
        for (int j = 0; j < b; ++j) {
            double fitness;
            BdPoint bd;
            if (m == 1) {
                fitness = evals[j].fitness;
                bd = evals[j].bd;
            } else {
                for (int s = 0; s < m; ++s) {
                    fits[s] = evals[static_cast<std::size_t>(j) * m + s].fitness;
                    for (int d = 0; d < task_.spec().bd_dim; ++d)
                        bds[d][s] = evals[static_cast<std::size_t>(j) * m + s].bd[d];
                }
                fitness = exact_mean(fits);
                bd.resize(task_.spec().bd_dim);
                for (int d = 0; d < task_.spec().bd_dim; ++d) bd[d] = exact_mean(bds[d]);
            }
            const std::int64_t id = eval_id_ + static_cast<std::int64_t>(j) * m;
            outcomes[j].op = ops[j];
            if (deep_) {
                deep_->add(offspring[j], fitness, bd, var_rng_);
                outcomes[j].outcome = AddOutcome::NewCell; // deep-grid always stores
            } else {
                outcomes[j].outcome = archive_.try_add(offspring[j], fitness, bd, id);
            }
        }
        eval_id_ += static_cast<std::int64_t>(b) * m;
        evals_ += static_cast<std::int64_t>(b) * m;
        append_record(outcomes);
        ++gen_;
    }

    void train_networks() {
        for (int k = 0; k < cfg_.n_crit; ++k) {
            const double loss = critic_update(*ensemble_, *buffer_, cfg_.td3, train_rng_);
            critic_log_.push_back({ensemble_->steps(), loss});
            greedy_actor_update(*ensemble_, *buffer_, cfg_.td3, train_rng_);
        }
    }

    void produce_offspring(std::vector<ParamVector>& offspring, std::vector<OperatorKind>& ops) {
        const BatchSplit split = cfg_.algorithm == Algorithm::PgaMapElites
                                     ? split_batch(cfg_.variation)
                                     : BatchSplit{cfg_.variation.batch_size, 0, 0};
        int j = 0;
        for (int k = 0; k < split.n_ga; ++k, ++j) {
            auto [p1, p2] = select_two_parents();
            offspring[j] = ga_directional(p1, p2, cfg_.variation, var_rng_);
            ops[j] = OperatorKind::Ga;
        }
        for (int k = 0; k < split.n_pg; ++k, ++j) {
            offspring[j] =
                pg_variation(select_one_parent(), *ensemble_, *buffer_, cfg_.variation, var_rng_);
            ops[j] = OperatorKind::Pg;
        }
        if (split.n_greedy > 0) {
            offspring[j] = greedy_offspring(*ensemble_);
            ops[j] = OperatorKind::Greedy;
        }
    }

    std::pair<ParamVector, ParamVector> select_two_parents() {
        if (deep_) {
            auto [e1, f1] = deep_->select_uniform(var_rng_);
            auto [e2, f2] = deep_->select_uniform(var_rng_);
            return {e1->genotype, e2->genotype};
        }
        const auto parents = archive_.uniform_select(2, var_rng_);
        return {parents[0]->genotype, parents[1]->genotype};
    }

    ParamVector select_one_parent() {
        return archive_.uniform_select(1, var_rng_)[0]->genotype;
    }

    void append_record(std::span<const OffspringOutcome> outcomes) {
        const double floor = task_.spec().fitness_floor;
        const MetricSet m =
            deep_ ? compute_deep_metrics(*deep_, floor) : compute_metrics(archive_, floor);
        const OperatorCounts counts = count_additions(outcomes);
        records_.push_back(RunRecord{gen_, evals_, m.qd_score, m.coverage, m.max_fitness,
                                     counts.init, counts.ga, counts.pg, counts.greedy});
    }

    const AlgoConfig& cfg_;
    const Task& task_;
    Rng init_rng_, var_rng_, eval_rng_, train_rng_;
    MlpSpec actor_spec_;
    CvtArchive archive_;
    std::optional<DeepGridArchive> deep_;
    std::optional<CriticEnsemble> ensemble_;
    std::optional<ReplayBuffer> buffer_;
    std::int64_t evals_ = 0, eval_id_ = 0, gen_ = 0;
    std::vector<RunRecord> records_;
    std::vector<CriticLogEntry> critic_log_;
};

AlgoConfig with_algorithm(AlgoConfig cfg, Algorithm algo) {
    cfg.algorithm = algo;
    return cfg;
}

} // namespace

RunResult run_pga(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                  std::uint64_t run_seed) {
    return QdLoop(with_algorithm(cfg, Algorithm::PgaMapElites), task, std::move(centroids),
                  run_seed)
        .run();
}

RunResult run_map_elites(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                         std::uint64_t run_seed) {
    return QdLoop(with_algorithm(cfg, Algorithm::MapElites), task, std::move(centroids), run_seed)
        .run();
}

RunResult run_map_elites_sampling(const AlgoConfig& cfg, const Task& task,
                                  std::vector<BdPoint> centroids, std::uint64_t run_seed) {
    if (cfg.sampling_m < 1)
        throw std::invalid_argument("run_map_elites_sampling: sampling_m must be >= 1");
    return QdLoop(with_algorithm(cfg, Algorithm::MapElitesSampling), task, std::move(centroids),
                  run_seed)
        .run();
}

RunResult run_deep_grid(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                        std::uint64_t run_seed) {
    return QdLoop(with_algorithm(cfg, Algorithm::DeepGrid), task, std::move(centroids), run_seed)
        .run();
}

RunResult run_td3_passive(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                          std::uint64_t run_seed) {
    const TaskSpec& spec = task.spec();
    Rng eval_rng(derive_seed(run_seed, stream::kEval));
    Rng train_rng(derive_seed(run_seed, stream::kTraining));
    const MlpSpec actor_spec = MlpSpec::actor(spec.obs_dim, cfg.actor_hidden, spec.act_dim);
    CriticEnsemble ensemble(actor_spec,
                            MlpSpec::critic(spec.obs_dim, spec.act_dim, cfg.critic_hidden),
                            train_rng);
    ReplayBuffer buffer(spec.obs_dim, spec.act_dim, cfg.replay_capacity);
    CvtArchive archive(std::move(centroids));

    std::vector<RunRecord> records;
    std::vector<CriticLogEntry> critic_log;
    std::int64_t evals = 0, eval_id = 0, cycle = 0, total_steps = 0;
    MlpWorkspace ws;
    std::vector<double> action(spec.act_dim);
    while (evals < cfg.eval_budget) {
        // one training episode with exploration noise
        Rng ep_rng(eval_rng.next_u64());
        std::vector<double> state = task.initial_state(ep_rng);
        for (int t = 0; t < spec.horizon; ++t) {
            if (total_steps < cfg.td3_warmup_steps) {
                for (double& a : action) a = train_rng.uniform(-1.0, 1.0);
            } else {
                const auto& mean = forward(actor_spec, ensemble.greedy(), state, ws);
                for (int d = 0; d < spec.act_dim; ++d)
                    action[d] = std::clamp(
                        mean[d] + cfg.td3.exploration_sigma * train_rng.normal(), -1.0, 1.0);
            }
            StepOutcome out = task.step(state, action);
            const bool terminal = out.done || t == spec.horizon - 1;
            buffer.push(state, action, out.reward, out.next_state, terminal);
            ++total_steps;
            if (total_steps >= cfg.td3_warmup_steps) {
                const double loss = critic_update(ensemble, buffer, cfg.td3, train_rng);
                critic_log.push_back({ensemble.steps(), loss});
                greedy_actor_update(ensemble, buffer, cfg.td3, train_rng);
            }
            if (!all_finite(out.next_state)) break;
            state = std::move(out.next_state);
            if (out.done) break;
        }
        evals += 1;
        ++eval_id;

        // the current actor is offered to the archive; training never reads it
        const EvalResult res = evaluate(task, actor_spec, ensemble.greedy(), eval_rng.next_u64());
        evals += 1;
        ++eval_id;
        const AddOutcome outcome = archive.try_add(ensemble.greedy(), res.fitness, res.bd, eval_id);

        const MetricSet m = compute_metrics(archive, spec.fitness_floor);
        records.push_back(RunRecord{cycle, evals, m.qd_score, m.coverage, m.max_fitness, 0, 0, 0,
                                    outcome == AddOutcome::Rejected ? 0 : 1});
        ++cycle;
    }
    return RunResult{std::move(archive), std::move(records),    std::move(critic_log),
                     ensemble.greedy(),  std::move(actor_spec), evals};
}

RunResult run_algorithm(const AlgoConfig& cfg, const Task& task, std::vector<BdPoint> centroids,
                        std::uint64_t run_seed) {
    switch (cfg.algorithm) {
    case Algorithm::PgaMapElites: return run_pga(cfg, task, std::move(centroids), run_seed);
    case Algorithm::MapElites: return run_map_elites(cfg, task, std::move(centroids), run_seed);
    case Algorithm::MapElitesSampling:
        return run_map_elites_sampling(cfg, task, std::move(centroids), run_seed);
    case Algorithm::DeepGrid: return run_deep_grid(cfg, task, std::move(centroids), run_seed);
    case Algorithm::Td3Passive: return run_td3_passive(cfg, task, std::move(centroids), run_seed);
    }
    throw std::invalid_argument("run_algorithm: bad algorithm enum");
}

} // namespace qdpg

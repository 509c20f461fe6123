#include "qdpg/variation.hpp"

#include <cmath>
#include <stdexcept>

namespace qdpg {

ParamVector ga_directional(const ParamVector& parent1, const ParamVector& parent2,
                           const VariationConfig& cfg, Rng& rng) {
    if (parent1.size() != parent2.size())
        throw std::invalid_argument("ga_directional: parent length mismatch");
    ParamVector child(parent1.size());
    for (std::size_t i = 0; i < child.size(); ++i)
        child[i] = parent1[i] + cfg.sigma1 * rng.normal();
    const double u = rng.normal();
    for (std::size_t i = 0; i < child.size(); ++i)
        child[i] += cfg.sigma2 * (parent2[i] - parent1[i]) * u;
    return child;
}

ParamVector pg_variation(const ParamVector& parent, const CriticEnsemble& ensemble,
                         const ReplayBuffer& buffer, const VariationConfig& cfg, Rng& rng) {
    if (cfg.n_act < 0) throw std::invalid_argument("pg_variation: n_act must be >= 0");
    if (cfg.n_act > 0 && buffer.empty())
        throw std::runtime_error("pg_variation: replay buffer is empty");
    ParamVector child = parent;
    AdamState opt(child.size());
    for (int k = 0; k < cfg.n_act; ++k)
        actor_ascent_step(ensemble.actor_spec(), child, opt, ensemble.critic_spec(),
                          ensemble.q1(), buffer, cfg.pg_batch, cfg.lr_pg, rng);
    return child;
}

BatchSplit split_batch(const VariationConfig& cfg) {
    if (cfg.batch_size < 1) throw std::invalid_argument("split_batch: batch_size must be >= 1");
    if (cfg.proportion_ga < 0.0 || cfg.proportion_ga > 1.0)
        throw std::invalid_argument("split_batch: proportion_ga must be in [0,1]");
    BatchSplit s;
    s.n_ga = static_cast<int>(std::floor(cfg.proportion_ga * cfg.batch_size));
    s.n_greedy = cfg.proportion_ga < 1.0 ? 1 : 0;
    s.n_pg = cfg.batch_size - s.n_ga - s.n_greedy;
    return s;
}

ParamVector greedy_offspring(const CriticEnsemble& ensemble) { return ensemble.greedy(); }

} // namespace qdpg

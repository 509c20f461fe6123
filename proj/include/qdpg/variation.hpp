#pragma once

#include "qdpg/mlp.hpp"
#include "qdpg/replay.hpp"
#include "qdpg/rng.hpp"
#include "qdpg/td3.hpp"

namespace qdpg {

struct VariationConfig {
    double sigma1 = 0.005;      // isotropic GA noise
    double sigma2 = 0.05;       // directional GA step scale
    int n_act = 50;             // gradient-ascent steps per PG offspring
    double lr_pg = 0.005;
    int pg_batch = 256;         // N, transitions per ascent step
    double proportion_ga = 0.5; // GA share of the batch
    int batch_size = 100;       // b, offspring per generation
};

/// Directional variation: child = p1 + sigma1 * z + sigma2 * (p2 - p1) * u,
/// z ~ N(0, I) per component, u ~ N(0, 1) scalar (drawn after z).
/// Fitness-agnostic: reads nothing but the two parents.
ParamVector ga_directional(const ParamVector& parent1, const ParamVector& parent2,
                           const VariationConfig& cfg, Rng& rng);

/// Critic-guided variation: copy of `parent` improved by n_act Adam-ascent
/// steps on mean Q1(s, pi(s)), each over a freshly sampled batch. Optimizer
/// state is fresh per offspring.
ParamVector pg_variation(const ParamVector& parent, const CriticEnsemble& ensemble,
                         const ReplayBuffer& buffer, const VariationConfig& cfg, Rng& rng);

struct BatchSplit {
    int n_ga = 0;
    int n_pg = 0;
    int n_greedy = 0;
};

/// n_ga = floor(proportion_ga * b); one greedy copy inside the PG share
/// unless the batch is pure GA; the PG operator fills the rest.
BatchSplit split_batch(const VariationConfig& cfg);

/// Deep copy of the current greedy actor parameters.
ParamVector greedy_offspring(const CriticEnsemble& ensemble);

} // namespace qdpg

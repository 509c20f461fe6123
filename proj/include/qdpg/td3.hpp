#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qdpg/mlp.hpp"
#include "qdpg/replay.hpp"
#include "qdpg/rng.hpp"

namespace qdpg {

struct Td3Config {
    double gamma = 0.99;
    double tau = 0.005;
    int policy_delay = 2;          // d
    double smoothing_sigma = 0.2;  // sigma_p, target policy smoothing
    double smoothing_clip = 0.5;   // c
    double exploration_sigma = 0.2; // sigma_a, environment interaction only
    int train_batch = 256;         // N
    double lr_critic = 3e-4;
    double lr_greedy = 3e-4;
};

/// Twin critics with target copies plus the greedy actor and its target.
/// Targets start as exact copies of the online networks.
class CriticEnsemble {
public:
    CriticEnsemble(MlpSpec actor_spec, MlpSpec critic_spec, Rng& init_rng);

    const MlpSpec& actor_spec() const { return actor_spec_; }
    const MlpSpec& critic_spec() const { return critic_spec_; }

    const ParamVector& q1() const { return q1_; }
    const ParamVector& q2() const { return q2_; }
    const ParamVector& q1_target() const { return q1_target_; }
    const ParamVector& q2_target() const { return q2_target_; }
    const ParamVector& greedy() const { return greedy_; }
    const ParamVector& greedy_target() const { return greedy_target_; }
    std::int64_t steps() const { return steps_; }

    // Mutable access, used by training steps and by oracle-injection tests.
    ParamVector& q1() { return q1_; }
    ParamVector& q2() { return q2_; }
    ParamVector& q1_target() { return q1_target_; }
    ParamVector& q2_target() { return q2_target_; }
    ParamVector& greedy() { return greedy_; }
    ParamVector& greedy_target() { return greedy_target_; }

    AdamState& q1_opt() { return q1_opt_; }
    AdamState& q2_opt() { return q2_opt_; }
    AdamState& greedy_opt() { return greedy_opt_; }
    std::int64_t& steps() { return steps_; }

private:
    MlpSpec actor_spec_, critic_spec_;
    ParamVector q1_, q2_, q1_target_, q2_target_, greedy_, greedy_target_;
    AdamState q1_opt_, q2_opt_, greedy_opt_;
    std::int64_t steps_ = 0;
};

/// target <- (1 - tau) * target + tau * online, componentwise.
void soft_update(ParamVector& target, const ParamVector& online, double tau);

/// Per-transition TD target: a' = clip(greedy_target(s') + eps, -1, 1) with
/// eps ~ clip(sigma_p N(0,I), -c, c), then
/// y = r + gamma * (1 - terminal) * min(Q1'(s',a'), Q2'(s',a')).
std::vector<double> compute_target(const CriticEnsemble& ensemble, const ReplayBuffer& buffer,
                                   std::span<const std::size_t> batch, const Td3Config& cfg,
                                   Rng& rng);

/// One Adam step on mean[(y - Q1)^2 + (y - Q2)^2] over a fresh batch.
/// Returns the pre-step loss and increments the step counter.
double critic_update(CriticEnsemble& ensemble, const ReplayBuffer& buffer, const Td3Config& cfg,
                     Rng& rng);

/// Delayed policy update: acts only when the step counter is a multiple of
/// policy_delay. One Adam ascent step on mean Q1(s, greedy(s)) over a fresh
/// batch, then soft-updates all three targets.
void greedy_actor_update(CriticEnsemble& ensemble, const ReplayBuffer& buffer,
                         const Td3Config& cfg, Rng& rng);

/// Shared gradient-ascent step for policies (greedy actor and PG variation):
/// one Adam step maximizing mean Q(s, pi(s)) over a freshly sampled batch of
/// `batch_size` states.
void actor_ascent_step(const MlpSpec& actor_spec, ParamVector& actor, AdamState& opt,
                       const MlpSpec& critic_spec, const ParamVector& critic,
                       const ReplayBuffer& buffer, int batch_size, double lr, Rng& rng);

} // namespace qdpg

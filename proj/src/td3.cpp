#include "qdpg/td3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdpg {

CriticEnsemble::CriticEnsemble(MlpSpec actor_spec, MlpSpec critic_spec, Rng& init_rng)
    : actor_spec_(std::move(actor_spec)),
      critic_spec_(std::move(critic_spec)),
      q1_(random_params(critic_spec_, init_rng)),
      q2_(random_params(critic_spec_, init_rng)),
      q1_target_(q1_),
      q2_target_(q2_),
      greedy_(random_params(actor_spec_, init_rng)),
      greedy_target_(greedy_),
      q1_opt_(q1_.size()),
      q2_opt_(q2_.size()),
      greedy_opt_(greedy_.size()) {
    if (critic_spec_.input_size() != actor_spec_.input_size() + actor_spec_.output_size())
        throw std::invalid_argument("CriticEnsemble: critic input must be obs_dim + act_dim");
    if (critic_spec_.output_size() != 1)
        throw std::invalid_argument("CriticEnsemble: critic output must be scalar");
}

void soft_update(ParamVector& target, const ParamVector& online, double tau) {
    if (target.size() != online.size()) throw std::invalid_argument("soft_update: shape mismatch");
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("soft_update: tau must be in [0,1]");
    for (std::size_t i = 0; i < target.size(); ++i)
        target[i] = (1.0 - tau) * target[i] + tau * online[i];
}

namespace {

// Concatenate state and action into the critic input buffer.
void fill_critic_input(std::span<const double> state, std::span<const double> action,
                       std::vector<double>& input) {
    input.resize(state.size() + action.size());
    std::copy(state.begin(), state.end(), input.begin());
    std::copy(action.begin(), action.end(), input.begin() + state.size());
}

} // namespace

std::vector<double> compute_target(const CriticEnsemble& ensemble, const ReplayBuffer& buffer,
                                   std::span<const std::size_t> batch, const Td3Config& cfg,
                                   Rng& rng) {
    if (batch.empty()) throw std::invalid_argument("compute_target: empty batch");
    const MlpSpec& aspec = ensemble.actor_spec();
    const MlpSpec& cspec = ensemble.critic_spec();
    const int act_dim = aspec.output_size();

    std::vector<double> y(batch.size());
    MlpWorkspace actor_ws, critic_ws;
    std::vector<double> next_action(act_dim), critic_in;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const std::size_t i = batch[k];
        const auto s_next = buffer.next_state(i);
        const auto& a_raw = forward(aspec, ensemble.greedy_target(), s_next, actor_ws);
        for (int d = 0; d < act_dim; ++d) {
            const double noise = std::clamp(cfg.smoothing_sigma * rng.normal(),
                                            -cfg.smoothing_clip, cfg.smoothing_clip);
            next_action[d] = std::clamp(a_raw[d] + noise, -1.0, 1.0);
        }
        fill_critic_input(s_next, next_action, critic_in);
        const double v1 = forward(cspec, ensemble.q1_target(), critic_in, critic_ws)[0];
        const double v2 = forward(cspec, ensemble.q2_target(), critic_in, critic_ws)[0];
        const double mask = buffer.terminal(i) ? 0.0 : 1.0;
        y[k] = buffer.reward(i) + cfg.gamma * mask * std::min(v1, v2);
    }
    return y;
}

double critic_update(CriticEnsemble& ensemble, const ReplayBuffer& buffer, const Td3Config& cfg,
                     Rng& rng) {
    const auto batch = buffer.sample_indices(static_cast<std::size_t>(cfg.train_batch), rng);
    const auto y = compute_target(ensemble, buffer, batch, cfg, rng);

    const MlpSpec& cspec = ensemble.critic_spec();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    std::vector<double> g1(cspec.param_count(), 0.0), g2(cspec.param_count(), 0.0);
    MlpWorkspace ws;
    std::vector<double> critic_in;
    double loss = 0.0;
    double upstream[1];
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const std::size_t i = batch[k];
        fill_critic_input(buffer.state(i), buffer.action(i), critic_in);

        const double q1v = forward(cspec, ensemble.q1(), critic_in, ws)[0];
        upstream[0] = 2.0 * (q1v - y[k]) * inv_n;
        backward_into(cspec, ensemble.q1(), ws, upstream, g1, {});

        const double q2v = forward(cspec, ensemble.q2(), critic_in, ws)[0];
        upstream[0] = 2.0 * (q2v - y[k]) * inv_n;
        backward_into(cspec, ensemble.q2(), ws, upstream, g2, {});

        loss += ((y[k] - q1v) * (y[k] - q1v) + (y[k] - q2v) * (y[k] - q2v)) * inv_n;
    }
    if (!std::isfinite(loss)) throw std::runtime_error("critic_update: non-finite loss, aborting");

    adam_step(ensemble.q1_opt(), ensemble.q1(), g1, cfg.lr_critic);
    adam_step(ensemble.q2_opt(), ensemble.q2(), g2, cfg.lr_critic);
    ensemble.steps() += 1;
    return loss;
}

void actor_ascent_step(const MlpSpec& actor_spec, ParamVector& actor, AdamState& opt,
                       const MlpSpec& critic_spec, const ParamVector& critic,
                       const ReplayBuffer& buffer, int batch_size, double lr, Rng& rng) {
    const auto batch = buffer.sample_indices(static_cast<std::size_t>(batch_size), rng);
    const int obs_dim = actor_spec.input_size();
    const int act_dim = actor_spec.output_size();
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    std::vector<double> grad(actor_spec.param_count(), 0.0);
    std::vector<double> critic_in, critic_in_grad(critic_spec.input_size());
    std::vector<double> upstream_actor(act_dim);
    MlpWorkspace actor_ws, critic_ws;
    const double q_upstream[1] = {1.0};

    for (const std::size_t i : batch) {
        const auto s = buffer.state(i);
        const auto& a = forward(actor_spec, actor, s, actor_ws);
        fill_critic_input(s, a, critic_in);
        forward(critic_spec, critic, critic_in, critic_ws);
        backward_into(critic_spec, critic, critic_ws, q_upstream, {}, critic_in_grad);
        // ascend on mean Q: feed Adam the gradient of -Q
        for (int d = 0; d < act_dim; ++d)
            upstream_actor[d] = -critic_in_grad[obs_dim + d] * inv_n;
        backward_into(actor_spec, actor, actor_ws, upstream_actor, grad, {});
    }
    adam_step(opt, actor, grad, lr);
}

void greedy_actor_update(CriticEnsemble& ensemble, const ReplayBuffer& buffer,
                         const Td3Config& cfg, Rng& rng) {
    if (ensemble.steps() % cfg.policy_delay != 0) return;
    actor_ascent_step(ensemble.actor_spec(), ensemble.greedy(), ensemble.greedy_opt(),
                      ensemble.critic_spec(), ensemble.q1(), buffer, cfg.train_batch,
                      cfg.lr_greedy, rng);
    soft_update(ensemble.q1_target(), ensemble.q1(), cfg.tau);
    soft_update(ensemble.q2_target(), ensemble.q2(), cfg.tau);
    soft_update(ensemble.greedy_target(), ensemble.greedy(), cfg.tau);
}

} // namespace qdpg

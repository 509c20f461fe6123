#include "qdpg/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdpg {

namespace {

class PointNavTask final : public Task {
public:
    explicit PointNavTask(bool uncertain) {
        spec_.name = "pointnav";
        spec_.obs_dim = 4;
        spec_.act_dim = 2;
        spec_.horizon = 50;
        spec_.bd_dim = 2;
        spec_.bd_lo = {-kArena, -kArena};
        spec_.bd_hi = {kArena, kArena};
        spec_.uncertain = uncertain;
        spec_.init_noise_sigma = uncertain ? 0.05 : 0.0;
        spec_.fitness_floor = -10.0;
    }

    const TaskSpec& spec() const override { return spec_; }

    std::vector<double> initial_state(Rng& rng) const override {
        if (!spec_.uncertain) return {0.0, 0.0, 0.0, 0.0};
        const double s = spec_.init_noise_sigma;
        return {s * rng.normal(), s * rng.normal(), s * rng.normal(), s * rng.normal()};
    }

    StepOutcome step(std::span<const double> state, std::span<const double> action) const override {
        const double px = state[0], py = state[1], vx = state[2], vy = state[3];
        const double ax = action[0], ay = action[1];
        StepOutcome out;
        const double nx = std::clamp(px + 0.1 * vx, -kArena, kArena);
        const double ny = std::clamp(py + 0.1 * vy, -kArena, kArena);
        out.next_state = {nx, ny, 0.9 * vx + 0.1 * ax, 0.9 * vy + 0.1 * ay};
        out.reward = (nx - px) - 0.05 * (ax * ax + ay * ay);
        out.done = false;
        return out;
    }

    BdPoint raw_descriptor(const std::vector<Transition>& episode) const override {
        const auto& last = episode.back().next_state;
        return {last[0], last[1]};
    }

private:
    static constexpr double kArena = 5.0;
    TaskSpec spec_;
};

class DiagOneStepTask final : public Task {
public:
    DiagOneStepTask() {
        spec_.name = "diag_onestep";
        spec_.obs_dim = 2;
        spec_.act_dim = 2;
        spec_.horizon = 1;
        spec_.bd_dim = 2;
        spec_.bd_lo = {-1.0, -1.0};
        spec_.bd_hi = {1.0, 1.0};
        spec_.uncertain = false;
        spec_.init_noise_sigma = 0.0;
        spec_.fitness_floor = -4.0; // reward minimum is -(1.5^2 + 1.25^2)
    }

    const TaskSpec& spec() const override { return spec_; }

    std::vector<double> initial_state(Rng&) const override { return {0.0, 0.0}; }

    StepOutcome step(std::span<const double> state, std::span<const double> action) const override {
        StepOutcome out;
        out.next_state = {state[0], state[1]};
        const double dx = action[0] - kTargetX, dy = action[1] - kTargetY;
        out.reward = -(dx * dx + dy * dy);
        out.done = true;
        return out;
    }

    BdPoint raw_descriptor(const std::vector<Transition>& episode) const override {
        return {episode.back().action[0], episode.back().action[1]};
    }

public:
    static constexpr double kTargetX = 0.5;
    static constexpr double kTargetY = -0.25;

private:
    TaskSpec spec_;
};

BdPoint normalize_descriptor(const TaskSpec& spec, const BdPoint& raw) {
    BdPoint bd(raw.size());
    for (std::size_t d = 0; d < raw.size(); ++d) {
        const double span = spec.bd_hi[d] - spec.bd_lo[d];
        bd[d] = std::clamp((raw[d] - spec.bd_lo[d]) / span, 0.0, 1.0);
    }
    return bd;
}

} // namespace

std::unique_ptr<Task> task_pointnav(bool uncertain) {
    return std::make_unique<PointNavTask>(uncertain);
}

std::unique_ptr<Task> task_diag_onestep() { return std::make_unique<DiagOneStepTask>(); }

std::unique_ptr<Task> make_task(const std::string& name, bool uncertain) {
    if (name == "pointnav") return task_pointnav(uncertain);
    if (name == "diag_onestep") {
        if (uncertain)
            throw std::invalid_argument("make_task: diag_onestep has no uncertain variant");
        return task_diag_onestep();
    }
    throw std::invalid_argument("make_task: unknown task '" + name + "'");
}

EvalResult evaluate(const Task& task, const MlpSpec& policy_spec, const ParamVector& params,
                    std::uint64_t episode_seed) {
    const TaskSpec& spec = task.spec();
    if (policy_spec.input_size() != spec.obs_dim || policy_spec.output_size() != spec.act_dim)
        throw std::invalid_argument("evaluate: policy does not match task dimensions");

    EvalResult res;
    res.episode_seed = episode_seed;
    Rng rng(episode_seed);
    std::vector<double> state = task.initial_state(rng);
    MlpWorkspace ws;
    bool truncated = false;
    for (int t = 0; t < spec.horizon; ++t) {
        const auto& action = forward(policy_spec, params, state, ws);
        StepOutcome out = task.step(state, action);
        const bool terminal = out.done || t == spec.horizon - 1;
        res.transitions.push_back(
            Transition{state, action, out.reward, out.next_state, terminal});
        if (!all_finite(out.next_state) || !std::isfinite(out.reward)) {
            res.transitions.back().terminal = true;
            truncated = true;
            break;
        }
        res.fitness += out.reward;
        state = std::move(out.next_state);
        if (out.done) break;
    }
    if (truncated) res.fitness = spec.fitness_floor;
    res.bd = normalize_descriptor(spec, task.raw_descriptor(res.transitions));
    return res;
}

} // namespace qdpg

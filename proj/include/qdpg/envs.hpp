#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qdpg/archive.hpp"
#include "qdpg/mlp.hpp"
#include "qdpg/replay.hpp"
#include "qdpg/rng.hpp"

namespace qdpg {

struct TaskSpec {
    std::string name;
    int obs_dim = 0;
    int act_dim = 0;
    int horizon = 1; // T
    int bd_dim = 0;
    std::vector<double> bd_lo, bd_hi; // raw descriptor bounds, mapped to [0,1]
    bool uncertain = false;
    double init_noise_sigma = 0.0; // nonzero iff uncertain
    double fitness_floor = 0.0;    // QD-score offset and truncation fitness
};

struct StepOutcome {
    std::vector<double> next_state;
    double reward = 0.0;
    bool done = false;
};

/// Episodic continuous-control MDP. Dynamics are pure functions of
/// (state, action); the initial-state draw is the only stochastic element
/// and only in the uncertain variant.
class Task {
public:
    virtual ~Task() = default;
    virtual const TaskSpec& spec() const = 0;

    /// Deterministic variants must not consume the rng at all.
    virtual std::vector<double> initial_state(Rng& rng) const = 0;

    virtual StepOutcome step(std::span<const double> state,
                             std::span<const double> action) const = 0;

    /// Raw (unnormalized) descriptor extracted from a completed episode.
    virtual BdPoint raw_descriptor(const std::vector<Transition>& episode) const = 0;
};

/// 2-D point mass: state (px, py, vx, vy), acceleration actions in [-1,1]^2,
/// reward = x-progress minus action cost, descriptor = final position in the
/// [-5,5]^2 arena. The uncertain variant draws the initial position and
/// velocity from N(0, 0.05^2 I).
std::unique_ptr<Task> task_pointnav(bool uncertain);

/// Horizon-1 oracle task: constant zero observation, reward -|a - a*|^2 with
/// a* = (0.5, -0.25), descriptor = the action. Q*(s, a) equals the reward.
std::unique_ptr<Task> task_diag_onestep();

/// Lookup by config name ("pointnav", "diag_onestep"). Throws
/// std::invalid_argument for unknown names or unsupported variants.
std::unique_ptr<Task> make_task(const std::string& name, bool uncertain);

struct EvalResult {
    double fitness = 0.0;
    BdPoint bd;
    std::vector<Transition> transitions;
    std::uint64_t episode_seed = 0;
};

/// Rolls one episode of `task` under the policy. All stochasticity flows
/// through `episode_seed`, so results are reproducible per (params, seed).
/// A non-finite state or reward truncates the episode and floors the fitness
/// at the task's lower bound.
EvalResult evaluate(const Task& task, const MlpSpec& policy_spec, const ParamVector& params,
                    std::uint64_t episode_seed);

} // namespace qdpg

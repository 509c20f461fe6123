#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qdpg/rng.hpp"

namespace qdpg {

/// One environment step.
struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

/// FIFO ring of transitions, stored struct-of-arrays so training batches
/// stay cache-friendly at 10^6 capacity.
class ReplayBuffer {
public:
    ReplayBuffer(int obs_dim, int act_dim, std::size_t capacity);

    void push(std::span<const double> state, std::span<const double> action, double reward,
              std::span<const double> next_state, bool terminal);
    void push(const Transition& t);

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return size_ == 0; }
    int obs_dim() const { return obs_dim_; }
    int act_dim() const { return act_dim_; }

    std::span<const double> state(std::size_t i) const {
        return {states_.data() + i * obs_dim_, static_cast<std::size_t>(obs_dim_)};
    }
    std::span<const double> action(std::size_t i) const {
        return {actions_.data() + i * act_dim_, static_cast<std::size_t>(act_dim_)};
    }
    std::span<const double> next_state(std::size_t i) const {
        return {next_states_.data() + i * obs_dim_, static_cast<std::size_t>(obs_dim_)};
    }
    double reward(std::size_t i) const { return rewards_[i]; }
    bool terminal(std::size_t i) const { return terminals_[i] != 0; }

    /// n indices uniform with replacement. Throws std::runtime_error when
    /// empty.
    std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

    /// Materialized batch; consumes the rng exactly like sample_indices.
    std::vector<Transition> sample(std::size_t n, Rng& rng) const;

private:
    int obs_dim_, act_dim_;
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::size_t cursor_ = 0; // next write slot; wraps once full
    std::vector<double> states_, actions_, next_states_, rewards_;
    std::vector<unsigned char> terminals_;
};

} // namespace qdpg

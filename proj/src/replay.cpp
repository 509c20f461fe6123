#include "qdpg/replay.hpp"

#include <algorithm>
#include <stdexcept>

namespace qdpg {

ReplayBuffer::ReplayBuffer(int obs_dim, int act_dim, std::size_t capacity)
    : obs_dim_(obs_dim), act_dim_(act_dim), capacity_(capacity) {
    if (obs_dim < 1 || act_dim < 1 || capacity < 1)
        throw std::invalid_argument("ReplayBuffer: dims and capacity must be positive");
    states_.resize(capacity * obs_dim);
    actions_.resize(capacity * act_dim);
    next_states_.resize(capacity * obs_dim);
    rewards_.resize(capacity);
    terminals_.resize(capacity);
}

void ReplayBuffer::push(std::span<const double> state, std::span<const double> action,
                        double reward, std::span<const double> next_state, bool terminal) {
    if (static_cast<int>(state.size()) != obs_dim_ ||
        static_cast<int>(next_state.size()) != obs_dim_ ||
        static_cast<int>(action.size()) != act_dim_)
        throw std::invalid_argument("ReplayBuffer::push: shape mismatch");
    std::copy(state.begin(), state.end(), states_.begin() + cursor_ * obs_dim_);
    std::copy(action.begin(), action.end(), actions_.begin() + cursor_ * act_dim_);
    std::copy(next_state.begin(), next_state.end(), next_states_.begin() + cursor_ * obs_dim_);
    rewards_[cursor_] = reward;
    terminals_[cursor_] = terminal ? 1 : 0;
    cursor_ = (cursor_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
}

void ReplayBuffer::push(const Transition& t) {
    push(t.state, t.action, t.reward, t.next_state, t.terminal);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
    if (size_ == 0) throw std::runtime_error("ReplayBuffer::sample: buffer is empty");
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = rng.uniform_index(size_);
    return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    const auto idx = sample_indices(n, rng);
    std::vector<Transition> out;
    out.reserve(n);
    for (std::size_t i : idx) {
        Transition t;
        t.state.assign(state(i).begin(), state(i).end());
        t.action.assign(action(i).begin(), action(i).end());
        t.reward = reward(i);
        t.next_state.assign(next_state(i).begin(), next_state(i).end());
        t.terminal = terminal(i);
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace qdpg

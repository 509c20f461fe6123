#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qdpg/rng.hpp"

namespace qdpg {

enum class Activation { Tanh, Identity };

/// Shape of a fully-connected network. Parameters live in a flat vector,
/// per layer: weights row-major by output neuron, then biases.
struct MlpSpec {
    std::vector<int> layer_sizes; // input, hidden..., output
    Activation hidden_activation = Activation::Tanh;
    Activation output_activation = Activation::Tanh;

    static MlpSpec actor(int obs_dim, const std::vector<int>& hidden, int act_dim);
    static MlpSpec critic(int obs_dim, int act_dim, const std::vector<int>& hidden);

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    int n_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
    std::size_t param_count() const;

    /// Throws std::invalid_argument unless there are >= 2 layers, all >= 1.
    void validate() const;
};

/// Flat genotype: one policy or critic network's parameters.
using ParamVector = std::vector<double>;

bool all_finite(std::span<const double> v);

/// Fan-in uniform weights in [-1/sqrt(n_in), 1/sqrt(n_in)], zero biases.
ParamVector random_params(const MlpSpec& spec, Rng& rng);

/// Per-layer activations kept around so backward can reuse a forward pass.
/// tanh' is recovered from the activation value, so pre-activations are not
/// stored.
class MlpWorkspace {
public:
    const std::vector<double>& output() const { return acts_.back(); }

private:
    friend const std::vector<double>& forward(const MlpSpec&, std::span<const double>,
                                              std::span<const double>, MlpWorkspace&);
    friend void backward_into(const MlpSpec&, std::span<const double>, const MlpWorkspace&,
                              std::span<const double>, std::span<double>, std::span<double>);
    std::vector<std::vector<double>> acts_; // acts_[0] = input, acts_[l] = layer l output
    std::vector<double> delta_, delta_prev_;
};

/// Evaluates the network; activations are cached in `ws` for a later backward
/// pass. Returns a reference to the output activation owned by `ws`.
const std::vector<double>& forward(const MlpSpec& spec, std::span<const double> params,
                                   std::span<const double> input, MlpWorkspace& ws);

/// Allocating convenience wrapper.
std::vector<double> forward(const MlpSpec& spec, std::span<const double> params,
                            std::span<const double> input);

/// Gradients of <upstream, forward(params, input)>.
/// `param_grad` is accumulated (+=) so batch loops can share one buffer;
/// `input_grad` is overwritten, or skipped entirely when empty.
/// `ws` must hold the activations of the matching forward call.
void backward_into(const MlpSpec& spec, std::span<const double> params, const MlpWorkspace& ws,
                   std::span<const double> upstream, std::span<double> param_grad,
                   std::span<double> input_grad);

struct BackwardResult {
    ParamVector param_grad;
    std::vector<double> input_grad;
};

/// Self-contained forward+backward, for callers that do not batch.
BackwardResult backward(const MlpSpec& spec, std::span<const double> params,
                        std::span<const double> input, std::span<const double> upstream);

/// Adam moment state (beta1=0.9, beta2=0.999, eps=1e-8, bias-corrected).
struct AdamState {
    std::vector<double> m, v;
    std::int64_t t = 0;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One descent step on `params`. Throws std::runtime_error on a non-finite
/// gradient component (run aborted with diagnostic).
void adam_step(AdamState& state, ParamVector& params, std::span<const double> grad, double lr);

/// Length-prefixed little-endian float64 encoding, shared with the archive
/// genotype sidecar.
void write_param_vector(std::ostream& out, const ParamVector& v);
ParamVector read_param_vector(std::istream& in);

} // namespace qdpg

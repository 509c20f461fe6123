#include "qdpg/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qdpg {

MlpSpec MlpSpec::actor(int obs_dim, const std::vector<int>& hidden, int act_dim) {
    MlpSpec spec;
    spec.layer_sizes.push_back(obs_dim);
    spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
    spec.layer_sizes.push_back(act_dim);
    spec.hidden_activation = Activation::Tanh;
    spec.output_activation = Activation::Tanh; // actions bounded in (-1, 1)
    spec.validate();
    return spec;
}

MlpSpec MlpSpec::critic(int obs_dim, int act_dim, const std::vector<int>& hidden) {
    MlpSpec spec;
    spec.layer_sizes.push_back(obs_dim + act_dim);
    spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
    spec.layer_sizes.push_back(1);
    spec.hidden_activation = Activation::Tanh;
    spec.output_activation = Activation::Identity; // Q-values are unbounded
    spec.validate();
    return spec;
}

std::size_t MlpSpec::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        n += static_cast<std::size_t>(layer_sizes[l] + 1) * layer_sizes[l + 1];
    return n;
}

void MlpSpec::validate() const {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("MlpSpec: need at least input and output layers");
    for (int s : layer_sizes)
        if (s < 1) throw std::invalid_argument("MlpSpec: all layer sizes must be >= 1");
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

ParamVector random_params(const MlpSpec& spec, Rng& rng) {
    ParamVector params(spec.param_count());
    std::size_t off = 0;
    for (int l = 0; l < spec.n_layers(); ++l) {
        const int n_in = spec.layer_sizes[l];
        const int n_out = spec.layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(n_in));
        for (int i = 0; i < n_in * n_out; ++i) params[off++] = rng.uniform(-bound, bound);
        off += static_cast<std::size_t>(n_out); // biases stay zero
    }
    return params;
}

namespace {

double activate(double x, Activation a) {
    return a == Activation::Tanh ? std::tanh(x) : x;
}

// Derivative from the activation value: tanh' = 1 - tanh^2, identity' = 1.
double activation_grad(double act, Activation a) {
    return a == Activation::Tanh ? 1.0 - act * act : 1.0;
}

void check_params(const MlpSpec& spec, std::span<const double> params) {
    if (params.size() != spec.param_count())
        throw std::invalid_argument("parameter vector length " + std::to_string(params.size()) +
                                    " does not match spec (" +
                                    std::to_string(spec.param_count()) + ")");
}

} // namespace

const std::vector<double>& forward(const MlpSpec& spec, std::span<const double> params,
                                   std::span<const double> input, MlpWorkspace& ws) {
    check_params(spec, params);
    if (static_cast<int>(input.size()) != spec.input_size())
        throw std::invalid_argument("input length " + std::to_string(input.size()) +
                                    " does not match network input size " +
                                    std::to_string(spec.input_size()));

    const int n_layers = spec.n_layers();
    ws.acts_.resize(n_layers + 1);
    ws.acts_[0].assign(input.begin(), input.end());

    std::size_t off = 0;
    for (int l = 0; l < n_layers; ++l) {
        const int n_in = spec.layer_sizes[l];
        const int n_out = spec.layer_sizes[l + 1];
        const Activation act =
            (l == n_layers - 1) ? spec.output_activation : spec.hidden_activation;
        const double* w = params.data() + off;
        const double* b = w + static_cast<std::size_t>(n_in) * n_out;
        const std::vector<double>& in = ws.acts_[l];
        std::vector<double>& out = ws.acts_[l + 1];
        out.resize(n_out);
        for (int o = 0; o < n_out; ++o) {
            const double* row = w + static_cast<std::size_t>(o) * n_in;
            double sum = b[o];
            for (int i = 0; i < n_in; ++i) sum += row[i] * in[i];
            out[o] = activate(sum, act);
        }
        off += static_cast<std::size_t>(n_in + 1) * n_out;
    }
    return ws.acts_.back();
}

std::vector<double> forward(const MlpSpec& spec, std::span<const double> params,
                            std::span<const double> input) {
    MlpWorkspace ws;
    return forward(spec, params, input, ws);
}

void backward_into(const MlpSpec& spec, std::span<const double> params, const MlpWorkspace& ws,
                   std::span<const double> upstream, std::span<double> param_grad,
                   std::span<double> input_grad) {
    check_params(spec, params);
    const bool want_params = !param_grad.empty();
    if (want_params && param_grad.size() != spec.param_count())
        throw std::invalid_argument("param_grad length does not match spec");
    if (static_cast<int>(upstream.size()) != spec.output_size())
        throw std::invalid_argument("upstream gradient length " + std::to_string(upstream.size()) +
                                    " does not match output size " +
                                    std::to_string(spec.output_size()));
    if (!input_grad.empty() && static_cast<int>(input_grad.size()) != spec.input_size())
        throw std::invalid_argument("input_grad length does not match input size");

    const int n_layers = spec.n_layers();
    if (static_cast<int>(ws.acts_.size()) != n_layers + 1)
        throw std::invalid_argument("workspace does not hold a forward pass for this spec");

    auto& delta = const_cast<MlpWorkspace&>(ws).delta_;
    auto& delta_prev = const_cast<MlpWorkspace&>(ws).delta_prev_;

    delta.assign(upstream.begin(), upstream.end());
    for (int o = 0; o < spec.output_size(); ++o)
        delta[o] *= activation_grad(ws.acts_.back()[o], spec.output_activation);

    std::size_t layer_off = spec.param_count();
    for (int l = n_layers - 1; l >= 0; --l) {
        const int n_in = spec.layer_sizes[l];
        const int n_out = spec.layer_sizes[l + 1];
        layer_off -= static_cast<std::size_t>(n_in + 1) * n_out;
        const double* w = params.data() + layer_off;
        double* gw = want_params ? param_grad.data() + layer_off : nullptr;
        double* gb = want_params ? gw + static_cast<std::size_t>(n_in) * n_out : nullptr;
        const std::vector<double>& in = ws.acts_[l];

        const bool need_input_grad = l > 0 || !input_grad.empty();
        if (need_input_grad) {
            delta_prev.assign(n_in, 0.0);
        }
        for (int o = 0; o < n_out; ++o) {
            const double d = delta[o];
            const double* row = w + static_cast<std::size_t>(o) * n_in;
            if (want_params) {
                gb[o] += d;
                double* grow = gw + static_cast<std::size_t>(o) * n_in;
                if (need_input_grad) {
                    for (int i = 0; i < n_in; ++i) {
                        grow[i] += d * in[i];
                        delta_prev[i] += d * row[i];
                    }
                } else {
                    for (int i = 0; i < n_in; ++i) grow[i] += d * in[i];
                }
            } else if (need_input_grad) {
                for (int i = 0; i < n_in; ++i) delta_prev[i] += d * row[i];
            }
        }
        if (l > 0) {
            // fold in the previous layer's activation derivative
            for (int i = 0; i < n_in; ++i)
                delta_prev[i] *= activation_grad(in[i], spec.hidden_activation);
            delta.swap(delta_prev);
        } else if (!input_grad.empty()) {
            for (int i = 0; i < n_in; ++i) input_grad[i] = delta_prev[i];
        }
    }
}

BackwardResult backward(const MlpSpec& spec, std::span<const double> params,
                        std::span<const double> input, std::span<const double> upstream) {
    MlpWorkspace ws;
    forward(spec, params, input, ws);
    BackwardResult res;
    res.param_grad.assign(spec.param_count(), 0.0);
    res.input_grad.assign(spec.input_size(), 0.0);
    backward_into(spec, params, ws, upstream, res.param_grad, res.input_grad);
    return res;
}

void adam_step(AdamState& state, ParamVector& params, std::span<const double> grad, double lr) {
    if (params.size() != grad.size() || state.m.size() != params.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    if (lr <= 0.0) throw std::invalid_argument("adam_step: lr must be positive");
    if (!all_finite(grad)) throw std::runtime_error("adam_step: non-finite gradient, run aborted");

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void write_param_vector(std::ostream& out, const ParamVector& v) {
    auto put_u64 = [&out](std::uint64_t x) {
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((x >> (8 * i)) & 0xff);
        out.write(bytes, 8);
    };
    put_u64(static_cast<std::uint64_t>(v.size()));
    for (double d : v) put_u64(std::bit_cast<std::uint64_t>(d));
}

ParamVector read_param_vector(std::istream& in) {
    auto get_u64 = [&in]() {
        char bytes[8];
        in.read(bytes, 8);
        if (!in) throw std::runtime_error("read_param_vector: truncated stream");
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i)
            x |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
        return x;
    };
    const std::uint64_t n = get_u64();
    ParamVector v(n);
    for (std::uint64_t i = 0; i < n; ++i) v[i] = std::bit_cast<double>(get_u64());
    return v;
}

} // namespace qdpg

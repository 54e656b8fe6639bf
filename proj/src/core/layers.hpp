#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "core/ops.hpp"
#include "core/tensor.hpp"

namespace har {

// Glorot-uniform draw: i.i.d. uniform on [-a, a], a = sqrt(6/(fan_in+fan_out)).
template <typename Real>
Tensor<Real> glorot_init(Shape shape, std::size_t fan_in, std::size_t fan_out,
                         std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    auto t = Tensor<Real>::zeros(std::move(shape), true);
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (auto& v : t.values()) v = static_cast<Real>(uni(rng));
    return t;
}

template <typename Real>
struct NamedParam {
    std::string name;
    Tensor<Real> tensor;
};

// Temporal convolution block: valid conv along the time axis, then ReLU.
// Parameter count: Cout*Cin*k + Cout.
template <typename Real>
struct ConvLayer {
    Tensor<Real> kernels;  // [Cout,Cin,k,1]
    Tensor<Real> bias;     // [Cout]

    static ConvLayer init(std::size_t cout, std::size_t cin, std::size_t k,
                          std::mt19937_64& rng) {
        ConvLayer layer;
        layer.kernels =
            glorot_init<Real>({cout, cin, k, 1}, cin * k, cout * k, rng);
        layer.bias = Tensor<Real>::zeros({cout}, true);
        return layer;
    }

    Tensor<Real> forward(Tape<Real>& tape, Tensor<Real> x) const {
        return relu(tape, conv2d_valid(tape, x, kernels, bias));
    }

    std::size_t param_count() const { return kernels.size() + bias.size(); }
};

// Single LSTM layer. Gate blocks are stacked in fixed order i,f,g,o along
// the first axis of W, U and b. One bias vector per gate set (4h bias terms
// total), which makes the layer's parameter count exactly
// 4*(input_size*h + h^2 + h).
template <typename Real>
struct LstmLayer {
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    Tensor<Real> weight_input;      // W [4h, input_size]
    Tensor<Real> weight_recurrent;  // U [4h, h]
    Tensor<Real> bias;              // b [4h]

    static LstmLayer init(std::size_t input_size, std::size_t hidden_size,
                          std::mt19937_64& rng) {
        LstmLayer layer;
        layer.input_size = input_size;
        layer.hidden_size = hidden_size;
        layer.weight_input = glorot_init<Real>({4 * hidden_size, input_size},
                                               input_size, hidden_size, rng);
        layer.weight_recurrent = glorot_init<Real>(
            {4 * hidden_size, hidden_size}, hidden_size, hidden_size, rng);
        layer.bias = Tensor<Real>::zeros({4 * hidden_size}, true);
        return layer;
    }

    std::size_t param_count() const {
        return weight_input.size() + weight_recurrent.size() + bias.size();
    }
};

template <typename Real>
struct LstmStepState {
    Tensor<Real> h;  // [B,h]
    Tensor<Real> c;  // [B,h]
};

// One cell step: gates = W*x_t + U*h_prev + b split into (i,f,g,o);
// c = f.c_prev + i.g, h = o.tanh(c).
template <typename Real>
LstmStepState<Real> lstm_step(Tape<Real>& tape, const LstmLayer<Real>& layer,
                              Tensor<Real> x_t, const LstmStepState<Real>& prev) {
    if (x_t.rank() != 2 || x_t.extent(1) != layer.input_size)
        throw ShapeError("lstm: input features " + shape_str(x_t.shape()) +
                         " do not match input_size=" +
                         std::to_string(layer.input_size));
    const std::size_t h = layer.hidden_size;
    auto gates = add(tape, linear(tape, x_t, layer.weight_input, &layer.bias),
                     linear(tape, prev.h, layer.weight_recurrent));
    auto gi = sigmoid(tape, slice_cols(tape, gates, 0, h));
    auto gf = sigmoid(tape, slice_cols(tape, gates, h, h));
    auto gg = tanh_op(tape, slice_cols(tape, gates, 2 * h, h));
    auto go = sigmoid(tape, slice_cols(tape, gates, 3 * h, h));
    LstmStepState<Real> next;
    next.c = add(tape, mul(tape, gf, prev.c), mul(tape, gi, gg));
    next.h = mul(tape, go, tanh_op(tape, next.c));
    return next;
}

// Run the layer over a step sequence (each [B,input_size]); initial state is
// zeros. Returns the hidden state at every step plus the final cell state
// when requested.
template <typename Real>
std::vector<Tensor<Real>> lstm_forward_steps(
    Tape<Real>& tape, const LstmLayer<Real>& layer,
    const std::vector<Tensor<Real>>& steps,
    LstmStepState<Real>* final_state = nullptr) {
    if (steps.empty()) throw ShapeError("lstm: empty step sequence");
    const std::size_t batch = steps.front().extent(0);
    LstmStepState<Real> state{
        Tensor<Real>::zeros({batch, layer.hidden_size}),
        Tensor<Real>::zeros({batch, layer.hidden_size})};
    std::vector<Tensor<Real>> outputs;
    outputs.reserve(steps.size());
    for (const auto& x_t : steps) {
        state = lstm_step(tape, layer, x_t, state);
        outputs.push_back(state.h);
    }
    if (final_state) *final_state = state;
    return outputs;
}

template <typename Real>
struct LstmSequenceOutput {
    Tensor<Real> outputs;  // [B,T,h], packed values
    std::vector<Tensor<Real>> step_outputs;
    Tensor<Real> final_hidden;  // [B,h]
    Tensor<Real> final_cell;    // [B,h]
};

// Sequence-tensor entry point: x [B,T,input_size].
template <typename Real>
LstmSequenceOutput<Real> lstm_forward(Tape<Real>& tape,
                                      const LstmLayer<Real>& layer,
                                      Tensor<Real> x) {
    if (x.rank() != 3 || x.extent(2) != layer.input_size)
        throw ShapeError("lstm: expected [B,T," +
                         std::to_string(layer.input_size) + "], got " +
                         shape_str(x.shape()));
    const std::size_t B = x.extent(0), T = x.extent(1);
    std::vector<Tensor<Real>> steps;
    steps.reserve(T);
    for (std::size_t t = 0; t < T; ++t) steps.push_back(select_time(tape, x, t));

    LstmSequenceOutput<Real> out;
    LstmStepState<Real> state;
    out.step_outputs = lstm_forward_steps(tape, layer, steps, &state);
    out.final_hidden = out.step_outputs.back();
    out.final_cell = state.c;

    out.outputs = Tensor<Real>::zeros({B, T, layer.hidden_size});
    const std::size_t h = layer.hidden_size;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t b = 0; b < B; ++b)
            std::copy_n(out.step_outputs[t].data() + b * h, h,
                        out.outputs.data() + (b * T + t) * h);
    return out;
}

// Dense classifier head: logits = x*W^T + b. Parameter count: K*in + K.
template <typename Real>
struct DenseLayer {
    Tensor<Real> weights;  // [K, in]
    Tensor<Real> bias;     // [K]

    static DenseLayer init(std::size_t out_dim, std::size_t in_dim,
                           std::mt19937_64& rng) {
        DenseLayer layer;
        layer.weights = glorot_init<Real>({out_dim, in_dim}, in_dim, out_dim, rng);
        layer.bias = Tensor<Real>::zeros({out_dim}, true);
        return layer;
    }

    Tensor<Real> forward(Tape<Real>& tape, Tensor<Real> x) const {
        return linear(tape, x, weights, &bias);
    }

    std::size_t param_count() const { return weights.size() + bias.size(); }
};

}  // namespace har

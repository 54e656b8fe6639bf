#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "core/layers.hpp"

namespace har {

// Architecture + window hyperparameters of one DeepConvLSTM variant.
struct ModelConfig {
    int num_conv_layers = 4;
    int num_filters = 64;
    int kernel_len = 11;
    int lstm_layers = 1;    // 1 or 2; a 2-layer stack shares hidden_units
    int hidden_units = 128;
    double dropout_p = 0.5;
    int num_classes = 0;
    int channels = 0;
    int window_samples = 0;

    int post_conv_time() const {
        return window_samples - num_conv_layers * (kernel_len - 1);
    }
    int lstm_input_extent() const { return num_filters * channels; }

    void validate() const {
        if (num_conv_layers < 1)
            throw ConfigError("num_conv_layers: must be >= 1");
        if (num_filters < 1) throw ConfigError("num_filters: must be >= 1");
        if (kernel_len < 1) throw ConfigError("kernel_len: must be >= 1");
        if (lstm_layers != 1 && lstm_layers != 2)
            throw ConfigError("lstm_layers: must be 1 or 2, got " +
                              std::to_string(lstm_layers));
        if (hidden_units < 1) throw ConfigError("hidden_units: must be >= 1");
        if (dropout_p < 0.0 || dropout_p >= 1.0)
            throw ConfigError("dropout_p: must lie in [0,1)");
        if (num_classes < 2) throw ConfigError("num_classes: must be >= 2");
        if (channels < 1) throw ConfigError("channels: must be >= 1");
        if (window_samples <= num_conv_layers * (kernel_len - 1))
            throw ConfigError(
                "window_samples: " + std::to_string(window_samples) +
                " leaves no time steps after " +
                std::to_string(num_conv_layers) + " convolutions of length " +
                std::to_string(kernel_len));
    }
};

struct ParamInfo {
    std::string name;
    Shape shape;
    std::size_t count;
};

// Conv stack -> (1 or 2)-layer LSTM -> dropout -> dense classifier.
// Classification reads the hidden state at the final time step only.
template <typename Real>
class DeepConvLstmModel {
public:
    static DeepConvLstmModel build(const ModelConfig& cfg, std::uint64_t seed) {
        cfg.validate();
        DeepConvLstmModel m;
        m.cfg_ = cfg;
        std::mt19937_64 rng(seed);
        std::size_t cin = 1;
        for (int i = 0; i < cfg.num_conv_layers; ++i) {
            m.convs_.push_back(ConvLayer<Real>::init(
                cfg.num_filters, cin, static_cast<std::size_t>(cfg.kernel_len),
                rng));
            cin = cfg.num_filters;
        }
        std::size_t lstm_in = static_cast<std::size_t>(cfg.lstm_input_extent());
        for (int i = 0; i < cfg.lstm_layers; ++i) {
            m.lstms_.push_back(LstmLayer<Real>::init(
                lstm_in, static_cast<std::size_t>(cfg.hidden_units), rng));
            lstm_in = static_cast<std::size_t>(cfg.hidden_units);
        }
        m.dense_ = DenseLayer<Real>::init(
            static_cast<std::size_t>(cfg.num_classes),
            static_cast<std::size_t>(cfg.hidden_units), rng);
        return m;
    }

    // batch [B,1,window_samples,channels] -> logits [B,num_classes].
    Tensor<Real> forward(Tape<Real>& tape, Tensor<Real> batch, bool training,
                         std::mt19937_64& rng) const {
        if (batch.rank() != 4 || batch.extent(1) != 1 ||
            batch.extent(2) != static_cast<std::size_t>(cfg_.window_samples) ||
            batch.extent(3) != static_cast<std::size_t>(cfg_.channels)) {
            throw ShapeError("forward: batch " + shape_str(batch.shape()) +
                             " does not match config [B,1," +
                             std::to_string(cfg_.window_samples) + "," +
                             std::to_string(cfg_.channels) + "]");
        }
        Tensor<Real> x = batch;
        for (const auto& conv : convs_) x = conv.forward(tape, x);
        const std::size_t steps = x.extent(2);
        std::vector<Tensor<Real>> seq;
        seq.reserve(steps);
        for (std::size_t t = 0; t < steps; ++t)
            seq.push_back(timestep_features(tape, x, t));
        for (const auto& lstm : lstms_) seq = lstm_forward_steps(tape, lstm, seq);
        Tensor<Real> last = dropout(tape, seq.back(), cfg_.dropout_p, training, rng);
        return dense_.forward(tape, last);
    }

    std::vector<Tensor<Real>> parameters() {
        std::vector<Tensor<Real>> out;
        for (auto& c : convs_) {
            out.push_back(c.kernels);
            out.push_back(c.bias);
        }
        for (auto& l : lstms_) {
            out.push_back(l.weight_input);
            out.push_back(l.weight_recurrent);
            out.push_back(l.bias);
        }
        out.push_back(dense_.weights);
        out.push_back(dense_.bias);
        return out;
    }

    std::vector<NamedParam<Real>> named_parameters() {
        std::vector<NamedParam<Real>> out;
        for (std::size_t i = 0; i < convs_.size(); ++i) {
            const std::string base = "conv" + std::to_string(i + 1);
            out.push_back({base + ".kernels", convs_[i].kernels});
            out.push_back({base + ".bias", convs_[i].bias});
        }
        for (std::size_t i = 0; i < lstms_.size(); ++i) {
            const std::string base = "lstm" + std::to_string(i + 1);
            out.push_back({base + ".weight_input", lstms_[i].weight_input});
            out.push_back({base + ".weight_recurrent", lstms_[i].weight_recurrent});
            out.push_back({base + ".bias", lstms_[i].bias});
        }
        out.push_back({"dense.weights", dense_.weights});
        out.push_back({"dense.bias", dense_.bias});
        return out;
    }

    std::vector<ParamInfo> parameter_inventory() {
        std::vector<ParamInfo> inv;
        for (const auto& p : named_parameters())
            inv.push_back({p.name, p.tensor.shape(), p.tensor.size()});
        return inv;
    }

    std::size_t lstm_param_total() const {
        std::size_t total = 0;
        for (const auto& l : lstms_) total += l.param_count();
        return total;
    }

    std::size_t param_total() const {
        std::size_t total = 0;
        for (const auto& c : convs_) total += c.param_count();
        total += lstm_param_total();
        total += dense_.param_count();
        return total;
    }

    void zero_grad() {
        for (auto& p : parameters()) p.zero_grad();
    }

    const ModelConfig& config() const { return cfg_; }
    const std::vector<LstmLayer<Real>>& lstm_layers() const { return lstms_; }

private:
    ModelConfig cfg_;
    std::vector<ConvLayer<Real>> convs_;
    std::vector<LstmLayer<Real>> lstms_;
    DenseLayer<Real> dense_;
};

}  // namespace har

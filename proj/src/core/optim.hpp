#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "core/data.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"

namespace har {

struct AdamConfig {
    double lr = 1e-4;
    double weight_decay = 1e-6;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    // Classic coupled L2 decay by default (g <- g + lambda*theta); the
    // decoupled variant subtracts lr*lambda*theta from the parameter instead.
    bool decoupled_decay = false;
};

// Adam with bias correction. Moment buffers mirror the parameter list given
// at construction; step() consumes the gradients populated by backward().
template <typename Real>
class Adam {
public:
    Adam(std::vector<Tensor<Real>> params, AdamConfig cfg)
        : params_(std::move(params)), cfg_(cfg) {
        for (const auto& p : params_) {
            m_.emplace_back(p.size(), Real(0));
            v_.emplace_back(p.size(), Real(0));
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            if (p.grad().size() != p.size())
                throw ShapeError("adam: parameter has no gradient buffer");
            Real* theta = p.data();
            const Real* grad = p.grad().data();
            Real* m = m_[i].data();
            Real* v = v_[i].data();
            for (std::size_t j = 0; j < p.size(); ++j) {
                double g = grad[j];
                if (!cfg_.decoupled_decay) g += cfg_.weight_decay * theta[j];
                m[j] = static_cast<Real>(cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g);
                v[j] = static_cast<Real>(cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g);
                const double m_hat = m[j] / bc1;
                const double v_hat = v[j] / bc2;
                double update = cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
                if (cfg_.decoupled_decay)
                    update += cfg_.lr * cfg_.weight_decay * theta[j];
                theta[j] = static_cast<Real>(theta[j] - update);
            }
        }
    }

    std::int64_t step_count() const { return t_; }

private:
    std::vector<Tensor<Real>> params_;
    std::vector<std::vector<Real>> m_;
    std::vector<std::vector<Real>> v_;
    AdamConfig cfg_;
    std::int64_t t_ = 0;
};

enum class LossWeighting { kInverseFrequency, kNone };

// Inverse-frequency class weights w_c = N/(K*n_c); balanced data gives all
// ones. Classes absent from the labels get the largest present weight.
std::vector<double> class_weights(const std::vector<int>& labels, int num_classes);

struct TrainRunConfig {
    int epochs = 30;
    int batch_size = 100;
    std::uint64_t seed = 1;
    bool shuffle = true;
    LossWeighting weighting = LossWeighting::kInverseFrequency;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    MetricsRecord train;
    std::optional<MetricsRecord> validation;
    double epoch_seconds = 0.0;
};

struct TrainingTrace {
    std::vector<EpochStats> epochs;
};

namespace detail {

template <typename Real>
Tensor<Real> batch_tensor(const WindowedDataset& ds,
                          const std::vector<std::size_t>& indices,
                          std::size_t begin, std::size_t end) {
    const std::size_t s_w = ds.window_samples, C = ds.channels;
    auto x = Tensor<Real>::zeros({end - begin, 1, s_w, C});
    for (std::size_t i = begin; i < end; ++i) {
        const double* src = ds.window(indices[i]);
        Real* dst = x.data() + (i - begin) * s_w * C;
        for (std::size_t j = 0; j < s_w * C; ++j) dst[j] = static_cast<Real>(src[j]);
    }
    return x;
}

template <typename Real>
std::vector<int> argmax_rows(const Tensor<Real>& logits) {
    const std::size_t B = logits.extent(0), K = logits.extent(1);
    std::vector<int> out(B);
    for (std::size_t b = 0; b < B; ++b) {
        const Real* row = logits.data() + b * K;
        out[b] = static_cast<int>(std::distance(
            row, std::max_element(row, row + K)));
    }
    return out;
}

}  // namespace detail

// Forward pass in evaluation mode; returns argmax predictions.
template <typename Real>
std::vector<int> predict(DeepConvLstmModel<Real>& model,
                         const WindowedDataset& ds, int batch_size = 100) {
    std::vector<int> preds;
    preds.reserve(ds.size());
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 unused_rng(0);
    for (std::size_t begin = 0; begin < ds.size();
         begin += static_cast<std::size_t>(batch_size)) {
        const std::size_t end =
            std::min(ds.size(), begin + static_cast<std::size_t>(batch_size));
        Tape<Real> tape;
        auto x = detail::batch_tensor<Real>(ds, order, begin, end);
        auto logits = model.forward(tape, x, false, unused_rng);
        auto p = detail::argmax_rows(logits);
        preds.insert(preds.end(), p.begin(), p.end());
    }
    return preds;
}

// Epoch loop of the training recipe: seeded shuffle, mini-batches, weighted
// cross-entropy, backward, Adam step. Train metrics come from the training
// forward passes; validation metrics from a clean evaluation pass.
// The optional callback sees each epoch's stats; returning false stops early.
template <typename Real>
TrainingTrace train_epochs(
    DeepConvLstmModel<Real>& model, const WindowedDataset& train_set,
    const WindowedDataset* validation_set, const TrainRunConfig& cfg,
    const AdamConfig& adam_cfg,
    const std::function<bool(const EpochStats&)>& on_epoch = nullptr) {
    if (cfg.epochs < 1) throw ConfigError("epochs: must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("batch_size: must be >= 1");
    if (train_set.size() == 0) throw DataError("train: empty dataset");

    const int K = model.config().num_classes;
    std::vector<double> weights_d =
        cfg.weighting == LossWeighting::kInverseFrequency
            ? class_weights(train_set.labels, K)
            : std::vector<double>(K, 1.0);
    std::vector<Real> weights(weights_d.begin(), weights_d.end());

    Adam<Real> adam(model.parameters(), adam_cfg);
    // Independent deterministic streams for shuffling and dropout.
    std::mt19937_64 seed_stream(cfg.seed);
    std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainingTrace trace;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t epoch_seed = seed_stream();
        if (cfg.shuffle) {
            std::mt19937_64 shuffle_rng(epoch_seed);
            std::shuffle(order.begin(), order.end(), shuffle_rng);
        }

        double loss_sum = 0.0;
        std::size_t batches = 0;
        std::vector<int> y_true, y_pred;
        y_true.reserve(train_set.size());
        y_pred.reserve(train_set.size());

        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(
                order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            Tape<Real> tape;
            auto x = detail::batch_tensor<Real>(train_set, order, begin, end);
            std::vector<int> targets;
            targets.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i)
                targets.push_back(train_set.labels[order[i]]);

            model.zero_grad();
            auto logits = model.forward(tape, x, true, dropout_rng);
            auto loss = softmax_cross_entropy_weighted(tape, logits, targets,
                                                       weights);
            const double loss_val = static_cast<double>(loss.item());
            if (!std::isfinite(loss_val))
                throw DivergenceError("training diverged: non-finite loss at "
                                      "epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(batches + 1));
            tape.backward(loss);
            adam.step();

            loss_sum += loss_val;
            ++batches;
            auto preds = detail::argmax_rows(logits);
            y_pred.insert(y_pred.end(), preds.begin(), preds.end());
            y_true.insert(y_true.end(), targets.begin(), targets.end());
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = loss_sum / static_cast<double>(batches);
        stats.train = compute_metrics(y_true, y_pred, K);
        if (validation_set && validation_set->size() > 0) {
            auto preds = predict(model, *validation_set, cfg.batch_size);
            stats.validation = compute_metrics(validation_set->labels, preds, K);
        }
        stats.epoch_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        trace.epochs.push_back(stats);
        if (on_epoch && !on_epoch(trace.epochs.back())) break;
    }
    return trace;
}

}  // namespace har

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "core/blas.hpp"
#include "core/tensor.hpp"

namespace har {

// ---------------------------------------------------------------------------
// Matrix products
// ---------------------------------------------------------------------------

// C[m,n] = A[m,k] * B[k,n].  dA = dC * B^T, dB = A^T * dC.
template <typename Real>
Tensor<Real> matmul(Tape<Real>& tape, Tensor<Real> a, Tensor<Real> b) {
    if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0)) {
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    }
    const int m = static_cast<int>(a.extent(0));
    const int k = static_cast<int>(a.extent(1));
    const int n = static_cast<int>(b.extent(1));
    bool needs_grad = a.requires_grad() || b.requires_grad();
    auto out = Tensor<Real>::zeros({a.extent(0), b.extent(1)}, needs_grad);
    gemm(false, false, m, n, k, Real(1), a.data(), k, b.data(), n, Real(0),
         out.data(), n);
    detail::check_output_finite(tape, out, "matmul");
    if (needs_grad) {
        tape.record([a, b, out, m, n, k]() mutable {
            if (a.requires_grad())
                gemm(false, true, m, k, n, Real(1), out.grad().data(), n,
                     b.data(), n, Real(1), a.grad().data(), k);
            if (b.requires_grad())
                gemm(true, false, k, n, m, Real(1), a.data(), k,
                     out.grad().data(), n, Real(1), b.grad().data(), n);
        });
    }
    return out;
}

// y[B,out] = x[B,in] * W[out,in]^T (+ bias[out]).
// dX = dY * W, dW += dY^T * X, db += column sums of dY.
template <typename Real>
Tensor<Real> linear(Tape<Real>& tape, Tensor<Real> x, Tensor<Real> weight,
                    const Tensor<Real>* bias = nullptr) {
    if (x.rank() != 2 || weight.rank() != 2 || x.extent(1) != weight.extent(1)) {
        throw ShapeError("linear: input " + shape_str(x.shape()) +
                         " does not match weight " + shape_str(weight.shape()));
    }
    if (bias && bias->size() != weight.extent(0))
        throw ShapeError("linear: bias " + shape_str(bias->shape()) +
                         " does not match weight " + shape_str(weight.shape()));
    const int batch = static_cast<int>(x.extent(0));
    const int in = static_cast<int>(x.extent(1));
    const int out_dim = static_cast<int>(weight.extent(0));
    bool needs_grad = x.requires_grad() || weight.requires_grad() ||
                      (bias && bias->requires_grad());
    auto out = Tensor<Real>::zeros({x.extent(0), weight.extent(0)}, needs_grad);
    gemm(false, true, batch, out_dim, in, Real(1), x.data(), in, weight.data(),
         in, Real(0), out.data(), out_dim);
    if (bias) {
        Real* o = out.data();
        const Real* bv = bias->data();
        for (int r = 0; r < batch; ++r)
            for (int c = 0; c < out_dim; ++c) o[r * out_dim + c] += bv[c];
    }
    detail::check_output_finite(tape, out, "linear");
    if (needs_grad) {
        Tensor<Real> b = bias ? *bias : Tensor<Real>();
        tape.record([x, weight, b, out, batch, in, out_dim]() mutable {
            const Real* dy = out.grad().data();
            if (x.requires_grad())
                gemm(false, false, batch, in, out_dim, Real(1), dy, out_dim,
                     weight.data(), in, Real(1), x.grad().data(), in);
            if (weight.requires_grad())
                gemm(true, false, out_dim, in, batch, Real(1), dy, out_dim,
                     x.data(), in, Real(1), weight.grad().data(), in);
            if (b.defined() && b.requires_grad()) {
                Real* db = b.grad().data();
                for (int r = 0; r < batch; ++r)
                    for (int c = 0; c < out_dim; ++c) db[c] += dy[r * out_dim + c];
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Elementwise suite
// ---------------------------------------------------------------------------

namespace detail {

template <typename Real, typename Fwd, typename Bwd>
Tensor<Real> binary_elementwise(Tape<Real>& tape, Tensor<Real> a,
                                Tensor<Real> b, const char* name, Fwd fwd,
                                Bwd bwd) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(name) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    bool needs_grad = a.requires_grad() || b.requires_grad();
    auto out = Tensor<Real>::zeros(a.shape(), needs_grad);
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
        out.values()[i] = fwd(a.values()[i], b.values()[i]);
    check_output_finite(tape, out, name);
    if (needs_grad) {
        tape.record([a, b, out, n, bwd]() mutable {
            for (std::size_t i = 0; i < n; ++i)
                bwd(a.values()[i], b.values()[i], out.grad()[i],
                    a.requires_grad() ? &a.grad()[i] : nullptr,
                    b.requires_grad() ? &b.grad()[i] : nullptr);
        });
    }
    return out;
}

template <typename Real, typename Fwd, typename Bwd>
Tensor<Real> unary_elementwise(Tape<Real>& tape, Tensor<Real> x,
                               const char* name, Fwd fwd, Bwd bwd) {
    bool needs_grad = x.requires_grad();
    auto out = Tensor<Real>::zeros(x.shape(), needs_grad);
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) out.values()[i] = fwd(x.values()[i]);
    check_output_finite(tape, out, name);
    if (needs_grad) {
        tape.record([x, out, n, bwd]() mutable {
            for (std::size_t i = 0; i < n; ++i)
                x.grad()[i] += bwd(x.values()[i], out.values()[i]) * out.grad()[i];
        });
    }
    return out;
}

}  // namespace detail

template <typename Real>
Tensor<Real> add(Tape<Real>& tape, Tensor<Real> a, Tensor<Real> b) {
    return detail::binary_elementwise(
        tape, a, b, "add", [](Real x, Real y) { return x + y; },
        [](Real, Real, Real g, Real* da, Real* db) {
            if (da) *da += g;
            if (db) *db += g;
        });
}

template <typename Real>
Tensor<Real> mul(Tape<Real>& tape, Tensor<Real> a, Tensor<Real> b) {
    return detail::binary_elementwise(
        tape, a, b, "mul", [](Real x, Real y) { return x * y; },
        [](Real x, Real y, Real g, Real* da, Real* db) {
            if (da) *da += g * y;
            if (db) *db += g * x;
        });
}

template <typename Real>
Tensor<Real> sigmoid(Tape<Real>& tape, Tensor<Real> x) {
    return detail::unary_elementwise(
        tape, x, "sigmoid",
        [](Real v) { return Real(1) / (Real(1) + std::exp(-v)); },
        [](Real, Real y) { return y * (Real(1) - y); });
}

template <typename Real>
Tensor<Real> tanh_op(Tape<Real>& tape, Tensor<Real> x) {
    return detail::unary_elementwise(
        tape, x, "tanh", [](Real v) { return std::tanh(v); },
        [](Real, Real y) { return Real(1) - y * y; });
}

template <typename Real>
Tensor<Real> relu(Tape<Real>& tape, Tensor<Real> x) {
    return detail::unary_elementwise(
        tape, x, "relu", [](Real v) { return v > Real(0) ? v : Real(0); },
        [](Real v, Real) { return v > Real(0) ? Real(1) : Real(0); });
}

// Inverted dropout: survivors scaled by 1/(1-p) at train time so evaluation
// is the identity.
template <typename Real>
Tensor<Real> dropout(Tape<Real>& tape, Tensor<Real> x, double p, bool training,
                     std::mt19937_64& rng) {
    if (p < 0.0 || p >= 1.0)
        throw ConfigError("dropout: rate must lie in [0,1), got " +
                          std::to_string(p));
    if (!training || p == 0.0) return x;
    bool needs_grad = x.requires_grad();
    auto out = Tensor<Real>::zeros(x.shape(), needs_grad);
    const std::size_t n = x.size();
    auto mask = std::make_shared<std::vector<Real>>(n);
    const Real scale = Real(1.0 / (1.0 - p));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        (*mask)[i] = uni(rng) < p ? Real(0) : scale;
        out.values()[i] = x.values()[i] * (*mask)[i];
    }
    detail::check_output_finite(tape, out, "dropout");
    if (needs_grad) {
        tape.record([x, out, mask, n]() mutable {
            for (std::size_t i = 0; i < n; ++i)
                x.grad()[i] += out.grad()[i] * (*mask)[i];
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structural ops
// ---------------------------------------------------------------------------

// Column slice of a [B,n] tensor: rows kept, columns [start, start+len).
template <typename Real>
Tensor<Real> slice_cols(Tape<Real>& tape, Tensor<Real> x, std::size_t start,
                        std::size_t len) {
    if (x.rank() != 2 || start + len > x.extent(1))
        throw ShapeError("slice_cols: [" + std::to_string(start) + "," +
                         std::to_string(start + len) + ") out of " +
                         shape_str(x.shape()));
    const std::size_t rows = x.extent(0), cols = x.extent(1);
    bool needs_grad = x.requires_grad();
    auto out = Tensor<Real>::zeros({rows, len}, needs_grad);
    for (std::size_t r = 0; r < rows; ++r)
        std::copy_n(x.data() + r * cols + start, len, out.data() + r * len);
    if (needs_grad) {
        tape.record([x, out, rows, cols, start, len]() mutable {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < len; ++c)
                    x.grad()[r * cols + start + c] += out.grad()[r * len + c];
        });
    }
    return out;
}

// Features of one time step of a [B,C,T,W] activation, flattened per batch
// row in (channel, sensor) order: out[b, c*W + w] = x[b,c,t,w].
template <typename Real>
Tensor<Real> timestep_features(Tape<Real>& tape, Tensor<Real> x,
                               std::size_t t) {
    if (x.rank() != 4 || t >= x.extent(2))
        throw ShapeError("timestep_features: step " + std::to_string(t) +
                         " out of " + shape_str(x.shape()));
    const std::size_t B = x.extent(0), C = x.extent(1), T = x.extent(2),
                      W = x.extent(3);
    bool needs_grad = x.requires_grad();
    auto out = Tensor<Real>::zeros({B, C * W}, needs_grad);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c)
            std::copy_n(x.data() + ((b * C + c) * T + t) * W, W,
                        out.data() + b * C * W + c * W);
    if (needs_grad) {
        tape.record([x, out, B, C, T, W, t]() mutable {
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t w = 0; w < W; ++w)
                        x.grad()[((b * C + c) * T + t) * W + w] +=
                            out.grad()[b * C * W + c * W + w];
        });
    }
    return out;
}

// Time step of a [B,T,F] sequence: out[b,f] = x[b,t,f].
template <typename Real>
Tensor<Real> select_time(Tape<Real>& tape, Tensor<Real> x, std::size_t t) {
    if (x.rank() != 3 || t >= x.extent(1))
        throw ShapeError("select_time: step " + std::to_string(t) + " out of " +
                         shape_str(x.shape()));
    const std::size_t B = x.extent(0), T = x.extent(1), F = x.extent(2);
    bool needs_grad = x.requires_grad();
    auto out = Tensor<Real>::zeros({B, F}, needs_grad);
    for (std::size_t b = 0; b < B; ++b)
        std::copy_n(x.data() + (b * T + t) * F, F, out.data() + b * F);
    if (needs_grad) {
        tape.record([x, out, B, T, F, t]() mutable {
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t f = 0; f < F; ++f)
                    x.grad()[(b * T + t) * F + f] += out.grad()[b * F + f];
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> sum(Tape<Real>& tape, Tensor<Real> x) {
    bool needs_grad = x.requires_grad();
    Real total = 0;
    for (Real v : x.values()) total += v;
    auto out = Tensor<Real>::scalar(total, needs_grad);
    if (needs_grad) {
        tape.record([x, out]() mutable {
            const Real g = out.grad()[0];
            for (auto& gx : x.grad()) gx += g;
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convolution (valid, stride 1, kernel slides along the time axis only)
// ---------------------------------------------------------------------------

// input [B,Cin,T,W], kernels [Cout,Cin,k,1], bias [Cout] -> [B,Cout,T-k+1,W].
// Lowered to GEMM via im2col: patches [Cin*k, B*(T-k+1)*W].
template <typename Real>
Tensor<Real> conv2d_valid(Tape<Real>& tape, Tensor<Real> input,
                          Tensor<Real> kernels, Tensor<Real> bias) {
    if (input.rank() != 4 || kernels.rank() != 4 || kernels.extent(3) != 1)
        throw ShapeError("conv2d_valid: expected input [B,Cin,T,W] and kernels "
                         "[Cout,Cin,k,1], got " +
                         shape_str(input.shape()) + " and " +
                         shape_str(kernels.shape()));
    const std::size_t B = input.extent(0), Cin = input.extent(1),
                      T = input.extent(2), W = input.extent(3);
    const std::size_t Cout = kernels.extent(0), k = kernels.extent(2);
    if (kernels.extent(1) != Cin)
        throw ShapeError("conv2d_valid: kernel channel extent " +
                         shape_str(kernels.shape()) + " does not match input " +
                         shape_str(input.shape()));
    if (bias.size() != Cout)
        throw ShapeError("conv2d_valid: bias " + shape_str(bias.shape()) +
                         " does not match Cout=" + std::to_string(Cout));
    if (T < k)
        throw ShapeError("conv2d_valid: window too short, time extent " +
                         std::to_string(T) + " < kernel length " +
                         std::to_string(k));

    const std::size_t Tout = T - k + 1;
    const std::size_t cols = B * Tout * W;
    const std::size_t patch = Cin * k;

    auto patches = std::make_shared<std::vector<Real>>(patch * cols);
    {
        Real* pm = patches->data();
        const Real* in = input.data();
        for (std::size_t ci = 0; ci < Cin; ++ci)
            for (std::size_t kk = 0; kk < k; ++kk) {
                Real* row = pm + (ci * k + kk) * cols;
                for (std::size_t b = 0; b < B; ++b) {
                    const Real* src = in + ((b * Cin + ci) * T + kk) * W;
                    std::copy_n(src, Tout * W, row + b * Tout * W);
                }
            }
    }

    bool needs_grad = input.requires_grad() || kernels.requires_grad() ||
                      bias.requires_grad();
    auto out = Tensor<Real>::zeros({B, Cout, Tout, W}, needs_grad);

    // out_mat [Cout, cols] = kernels [Cout, patch] * patches [patch, cols]
    std::vector<Real> out_mat(Cout * cols);
    gemm(false, false, static_cast<int>(Cout), static_cast<int>(cols),
         static_cast<int>(patch), Real(1), kernels.data(),
         static_cast<int>(patch), patches->data(), static_cast<int>(cols),
         Real(0), out_mat.data(), static_cast<int>(cols));
    {
        Real* o = out.data();
        const Real* bv = bias.data();
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t co = 0; co < Cout; ++co) {
                const Real* src = out_mat.data() + co * cols + b * Tout * W;
                Real* dst = o + (b * Cout + co) * Tout * W;
                const Real bb = bv[co];
                for (std::size_t i = 0; i < Tout * W; ++i) dst[i] = src[i] + bb;
            }
    }
    detail::check_output_finite(tape, out, "conv2d_valid");

    if (needs_grad) {
        tape.record([input, kernels, bias, out, patches, B, Cin, T, W, Cout, k,
                     Tout, cols, patch]() mutable {
            // Regroup dOut back into [Cout, cols] layout.
            std::vector<Real> dout_mat(Cout * cols);
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t co = 0; co < Cout; ++co)
                    std::copy_n(out.grad().data() + (b * Cout + co) * Tout * W,
                                Tout * W,
                                dout_mat.data() + co * cols + b * Tout * W);
            if (kernels.requires_grad())
                gemm(false, true, static_cast<int>(Cout),
                     static_cast<int>(patch), static_cast<int>(cols), Real(1),
                     dout_mat.data(), static_cast<int>(cols), patches->data(),
                     static_cast<int>(cols), Real(1), kernels.grad().data(),
                     static_cast<int>(patch));
            if (bias.requires_grad()) {
                for (std::size_t co = 0; co < Cout; ++co) {
                    Real acc = 0;
                    const Real* row = dout_mat.data() + co * cols;
                    for (std::size_t i = 0; i < cols; ++i) acc += row[i];
                    bias.grad()[co] += acc;
                }
            }
            if (input.requires_grad()) {
                std::vector<Real> dpatches(patch * cols);
                gemm(true, false, static_cast<int>(patch),
                     static_cast<int>(cols), static_cast<int>(Cout), Real(1),
                     kernels.data(), static_cast<int>(patch), dout_mat.data(),
                     static_cast<int>(cols), Real(0), dpatches.data(),
                     static_cast<int>(cols));
                Real* din = input.grad().data();
                for (std::size_t ci = 0; ci < Cin; ++ci)
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        const Real* row = dpatches.data() + (ci * k + kk) * cols;
                        for (std::size_t b = 0; b < B; ++b) {
                            Real* dst = din + ((b * Cin + ci) * T + kk) * W;
                            const Real* src = row + b * Tout * W;
                            for (std::size_t i = 0; i < Tout * W; ++i)
                                dst[i] += src[i];
                        }
                    }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Weighted softmax cross-entropy
// ---------------------------------------------------------------------------

// loss = sum_b w[t_b] * (-log softmax(logits_b)[t_b]) / sum_b w[t_b].
// Stabilized by per-row max subtraction.
template <typename Real>
Tensor<Real> softmax_cross_entropy_weighted(Tape<Real>& tape,
                                            Tensor<Real> logits,
                                            const std::vector<int>& targets,
                                            const std::vector<Real>& weights) {
    if (logits.rank() != 2)
        throw ShapeError("cross_entropy: logits must be [B,K], got " +
                         shape_str(logits.shape()));
    const std::size_t B = logits.extent(0), K = logits.extent(1);
    if (targets.size() != B)
        throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for batch of " + std::to_string(B));
    if (weights.size() != K)
        throw ShapeError("cross_entropy: weight vector length " +
                         std::to_string(weights.size()) + " != K=" +
                         std::to_string(K));
    for (Real w : weights)
        if (!(w > Real(0)))
            throw ConfigError("cross_entropy: class weights must be strictly positive");
    for (std::size_t b = 0; b < B; ++b)
        if (targets[b] < 0 || static_cast<std::size_t>(targets[b]) >= K)
            throw DataError("cross_entropy: target out of range at row " +
                            std::to_string(b) + ": " +
                            std::to_string(targets[b]));

    auto probs = std::make_shared<std::vector<Real>>(B * K);
    Real weight_sum = 0, loss_acc = 0;
    const Real* lv = logits.data();
    for (std::size_t b = 0; b < B; ++b) {
        const Real* row = lv + b * K;
        Real mx = row[0];
        for (std::size_t j = 1; j < K; ++j) mx = std::max(mx, row[j]);
        Real denom = 0;
        for (std::size_t j = 0; j < K; ++j) {
            Real e = std::exp(row[j] - mx);
            (*probs)[b * K + j] = e;
            denom += e;
        }
        for (std::size_t j = 0; j < K; ++j) (*probs)[b * K + j] /= denom;
        const Real w = weights[targets[b]];
        loss_acc += w * (std::log(denom) - (row[targets[b]] - mx));
        weight_sum += w;
    }
    bool needs_grad = logits.requires_grad();
    auto out = Tensor<Real>::scalar(loss_acc / weight_sum, needs_grad);
    detail::check_output_finite(tape, out, "cross_entropy");
    if (needs_grad) {
        auto tgt = std::make_shared<std::vector<int>>(targets);
        auto wts = std::make_shared<std::vector<Real>>(weights);
        tape.record([logits, out, probs, tgt, wts, B, K, weight_sum]() mutable {
            const Real g = out.grad()[0] / weight_sum;
            Real* dl = logits.grad().data();
            for (std::size_t b = 0; b < B; ++b) {
                const Real w = (*wts)[(*tgt)[b]];
                for (std::size_t j = 0; j < K; ++j) {
                    Real p = (*probs)[b * K + j];
                    Real ind = (static_cast<std::size_t>((*tgt)[b]) == j)
                                   ? Real(1)
                                   : Real(0);
                    dl[b * K + j] += g * w * (p - ind);
                }
            }
        });
    }
    return out;
}

}  // namespace har

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace har {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

template <typename Real>
struct TensorNode {
    Shape shape;
    std::vector<Real> values;
    std::vector<Real> grad;  // empty unless requires_grad
    bool requires_grad = false;
};

// Dense tensor handle. Copies share the underlying node; gradient
// accumulation is the only mutation after creation.
template <typename Real>
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        return filled(std::move(shape), Real(0), requires_grad);
    }

    static Tensor filled(Shape shape, Real value, bool requires_grad = false) {
        Tensor t;
        t.node_ = std::make_shared<TensorNode<Real>>();
        t.node_->shape = std::move(shape);
        t.node_->values.assign(shape_numel(t.node_->shape), value);
        t.node_->requires_grad = requires_grad;
        if (requires_grad) t.node_->grad.assign(t.node_->values.size(), Real(0));
        return t;
    }

    static Tensor from_values(Shape shape, std::vector<Real> values,
                              bool requires_grad = false) {
        if (shape_numel(shape) != values.size()) {
            throw ShapeError("tensor: " + shape_str(shape) + " needs " +
                             std::to_string(shape_numel(shape)) +
                             " values, got " + std::to_string(values.size()));
        }
        Tensor t;
        t.node_ = std::make_shared<TensorNode<Real>>();
        t.node_->shape = std::move(shape);
        t.node_->values = std::move(values);
        t.node_->requires_grad = requires_grad;
        if (requires_grad) t.node_->grad.assign(t.node_->values.size(), Real(0));
        return t;
    }

    static Tensor scalar(Real value, bool requires_grad = false) {
        return from_values({1}, {value}, requires_grad);
    }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t size() const { return node_->values.size(); }
    std::size_t extent(std::size_t dim) const { return node_->shape[dim]; }
    std::size_t rank() const { return node_->shape.size(); }

    std::vector<Real>& values() { return node_->values; }
    const std::vector<Real>& values() const { return node_->values; }
    Real* data() { return node_->values.data(); }
    const Real* data() const { return node_->values.data(); }

    bool requires_grad() const { return node_->requires_grad; }
    std::vector<Real>& grad() { return node_->grad; }
    const std::vector<Real>& grad() const { return node_->grad; }

    void zero_grad() {
        if (node_->requires_grad)
            std::fill(node_->grad.begin(), node_->grad.end(), Real(0));
    }

    Real item() const {
        if (size() != 1)
            throw ShapeError("item() on non-scalar tensor " + shape_str(shape()));
        return node_->values[0];
    }

    bool same_node(const Tensor& other) const { return node_ == other.node_; }

private:
    std::shared_ptr<TensorNode<Real>> node_;
};

// Reverse-mode tape. Forward passes append closures; backward() replays
// them once, in reverse. A tape and its tensors live on one worker.
template <typename Real>
class Tape {
public:
    void record(std::function<void()> backward_fn) {
        ops_.push_back(std::move(backward_fn));
    }

    void backward(Tensor<Real> loss) {
        if (loss.size() != 1)
            throw ShapeError("backward: loss must be a scalar, got " +
                             shape_str(loss.shape()));
        if (loss.requires_grad()) loss.grad()[0] = Real(1);
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }

    void clear() { ops_.clear(); }
    std::size_t size() const { return ops_.size(); }

    // Opt-in NaN/Inf detection on every op output; off by default so
    // benchmark timings measure the real training path.
    void set_check_finite(bool on) { check_finite_ = on; }
    bool check_finite() const { return check_finite_; }

private:
    std::vector<std::function<void()>> ops_;
    bool check_finite_ = false;
};

namespace detail {

template <typename Real>
void check_output_finite(const Tape<Real>& tape, const Tensor<Real>& t,
                         const char* op) {
    if (!tape.check_finite()) return;
    for (Real v : t.values()) {
        if (!std::isfinite(v))
            throw NumericError(std::string(op) + ": non-finite output value");
    }
}

}  // namespace detail

}  // namespace har

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/ops.hpp"
#include "gradcheck.hpp"

using har::Tape;
using Tensor = har::Tensor<double>;

TEST_CASE("matmul identity and hand products") {
    Tape<double> tape;
    auto eye = Tensor::from_values({2, 2}, {1, 0, 0, 1});
    auto b = Tensor::from_values({2, 2}, {3, 4, 5, 6});
    auto c = har::matmul(tape, eye, b);
    CHECK(c.values() == std::vector<double>{3, 4, 5, 6});

    auto row = Tensor::from_values({1, 2}, {1, 2});
    auto col = Tensor::from_values({2, 1}, {3, 4});
    CHECK(har::matmul(tape, row, col).item() == doctest::Approx(11.0));
}

TEST_CASE("matmul shape mismatch names both shapes") {
    Tape<double> tape;
    auto a = Tensor::zeros({2, 3});
    auto b = Tensor::zeros({2, 3});
    CHECK_THROWS_WITH_AS(har::matmul(tape, a, b),
                         doctest::Contains("[2x3]"), har::ShapeError);
}

TEST_CASE("matmul gradients match finite differences") {
    std::mt19937_64 rng(42);
    auto a = Tensor::from_values({3, 4}, testutil::random_values(12, rng), true);
    auto b = Tensor::from_values({4, 2}, testutil::random_values(8, rng), true);
    double err = testutil::max_grad_rel_error({a, b}, [&](Tape<double>& t) {
        return har::sum(t, har::matmul(t, a, b));
    });
    CHECK(err < 1e-4);
}

TEST_CASE("conv2d_valid sum kernel and scalar affine") {
    Tape<double> tape;
    auto input = Tensor::from_values({1, 1, 5, 1}, {1, 2, 3, 4, 5});
    auto ones = Tensor::from_values({1, 1, 5, 1}, {1, 1, 1, 1, 1});
    auto bias0 = Tensor::zeros({1});
    auto out = har::conv2d_valid(tape, input, ones, bias0);
    CHECK(out.shape() == har::Shape{1, 1, 1, 1});
    CHECK(out.item() == doctest::Approx(15.0));

    auto x = Tensor::from_values({1, 1, 1, 1}, {3});
    auto k = Tensor::from_values({1, 1, 1, 1}, {2});
    auto bias1 = Tensor::from_values({1}, {1});
    CHECK(har::conv2d_valid(tape, x, k, bias1).item() == doctest::Approx(7.0));
}

TEST_CASE("conv2d_valid shape algebra") {
    Tape<double> tape;
    auto x = Tensor::zeros({2, 1, 50, 3});
    auto k = Tensor::zeros({4, 1, 11, 1});
    auto b = Tensor::zeros({4});
    auto y = har::conv2d_valid(tape, x, k, b);
    CHECK(y.shape() == har::Shape{2, 4, 40, 3});

    // four stacked convolutions: 50 - 4*10 = 10
    auto k2 = Tensor::zeros({4, 4, 11, 1});
    for (int i = 0; i < 3; ++i) y = har::conv2d_valid(tape, y, k2, b);
    CHECK(y.extent(2) == 10);
}

TEST_CASE("conv2d_valid rejects windows shorter than the kernel") {
    Tape<double> tape;
    auto x = Tensor::zeros({1, 1, 4, 1});
    auto k = Tensor::zeros({1, 1, 5, 1});
    auto b = Tensor::zeros({1});
    CHECK_THROWS_WITH_AS(har::conv2d_valid(tape, x, k, b),
                         doctest::Contains("window too short"), har::ShapeError);
}

TEST_CASE("conv2d_valid gradients match finite differences") {
    std::mt19937_64 rng(7);
    auto x = Tensor::from_values({2, 2, 6, 2}, testutil::random_values(48, rng), true);
    auto k = Tensor::from_values({3, 2, 3, 1}, testutil::random_values(18, rng), true);
    auto b = Tensor::from_values({3}, testutil::random_values(3, rng), true);
    double err = testutil::max_grad_rel_error({x, k, b}, [&](Tape<double>& t) {
        auto y = har::conv2d_valid(t, x, k, b);
        return har::sum(t, har::mul(t, y, y));
    });
    CHECK(err < 1e-4);
}

TEST_CASE("elementwise fixed points") {
    Tape<double> tape;
    auto zero = Tensor::from_values({1}, {0.0});
    CHECK(har::sigmoid(tape, zero).item() == doctest::Approx(0.5));
    CHECK(har::tanh_op(tape, zero).item() == doctest::Approx(0.0));
}

TEST_CASE("elementwise gradients match finite differences") {
    std::mt19937_64 rng(3);
    auto x = Tensor::from_values({2, 5}, testutil::random_values(10, rng), true);
    auto y = Tensor::from_values({2, 5}, testutil::random_values(10, rng), true);
    double err = testutil::max_grad_rel_error({x, y}, [&](Tape<double>& t) {
        auto s = har::sigmoid(t, x);
        auto h = har::tanh_op(t, y);
        auto r = har::relu(t, har::add(t, s, h));
        return har::sum(t, har::mul(t, r, x));
    });
    CHECK(err < 1e-4);
}

TEST_CASE("dropout contracts") {
    Tape<double> tape;
    std::mt19937_64 rng(1);
    auto x = Tensor::from_values({2, 2}, {1, 2, 3, 4});

    SUBCASE("eval mode is the identity") {
        auto y = har::dropout(tape, x, 0.5, false, rng);
        CHECK(y.values() == x.values());
    }
    SUBCASE("zero rate is the identity") {
        auto y = har::dropout(tape, x, 0.0, true, rng);
        CHECK(y.values() == x.values());
    }
    SUBCASE("rate outside [0,1) is a configuration error") {
        CHECK_THROWS_AS(har::dropout(tape, x, 1.0, true, rng), har::ConfigError);
        CHECK_THROWS_AS(har::dropout(tape, x, -0.1, true, rng), har::ConfigError);
    }
}

TEST_CASE("dropout preserves expected mass") {
    // sum over many masks stays within 3 standard errors of the input sum
    Tape<double> tape;
    std::mt19937_64 rng(99);
    const double p = 0.5;
    auto x = Tensor::filled({100}, 1.0);
    const int trials = 2000;
    double total = 0.0;
    for (int i = 0; i < trials; ++i) {
        auto y = har::dropout(tape, x, p, true, rng);
        for (double v : y.values()) total += v;
        tape.clear();
    }
    const double n = 100.0 * trials;
    const double expected = n;
    // each kept element contributes 1/(1-p); variance per element p/(1-p)
    const double se = std::sqrt(n * p / (1.0 - p));
    CHECK(std::abs(total - expected) < 3.0 * se);
}

TEST_CASE("weighted cross-entropy hand values") {
    Tape<double> tape;
    SUBCASE("uniform softmax gives ln K") {
        auto logits = Tensor::zeros({1, 4});
        auto loss = har::softmax_cross_entropy_weighted(tape, logits, {2},
                                                        {1, 1, 1, 1});
        CHECK(loss.item() == doctest::Approx(std::log(4.0)));
    }
    SUBCASE("confident correct logit gives near-zero loss") {
        auto logits = Tensor::from_values({1, 2}, {10, -10});
        auto loss = har::softmax_cross_entropy_weighted(tape, logits, {0},
                                                        {1.5, 3.0});
        CHECK(loss.item() == doctest::Approx(2.06e-9).epsilon(0.01));
    }
    SUBCASE("weights cancel on equal per-row losses") {
        auto logits = Tensor::zeros({2, 2});  // per-row CE = ln 2 for any target
        auto loss = har::softmax_cross_entropy_weighted(tape, logits, {0, 1},
                                                        {2.0, 1.0});
        CHECK(loss.item() == doctest::Approx(std::log(2.0)));
    }
    SUBCASE("target out of range names the row") {
        auto logits = Tensor::zeros({2, 2});
        CHECK_THROWS_WITH_AS(
            har::softmax_cross_entropy_weighted(tape, logits, {0, 5}, {1.0, 1.0}),
            doctest::Contains("row 1"), har::DataError);
    }
}

TEST_CASE("weighted cross-entropy gradients match finite differences") {
    std::mt19937_64 rng(11);
    auto logits =
        Tensor::from_values({4, 3}, testutil::random_values(12, rng, 2.0), true);
    std::vector<int> targets{0, 2, 1, 2};
    std::vector<double> weights{0.5, 1.5, 2.0};
    double err = testutil::max_grad_rel_error({logits}, [&](Tape<double>& t) {
        return har::softmax_cross_entropy_weighted(t, logits, targets, weights);
    });
    CHECK(err < 1e-4);
}

TEST_CASE("backward basics") {
    SUBCASE("loss = sum(x) gives all-ones gradient") {
        Tape<double> tape;
        auto x = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6}, true);
        tape.backward(har::sum(tape, x));
        CHECK(x.grad() == std::vector<double>(6, 1.0));
    }
    SUBCASE("loss = sum(x^2) gives 2x") {
        Tape<double> tape;
        auto x = Tensor::from_values({3}, {1, 2, 3}, true);
        tape.backward(har::sum(tape, har::mul(tape, x, x)));
        CHECK(x.grad() == std::vector<double>{2, 4, 6});
    }
    SUBCASE("non-scalar loss is a contract error") {
        Tape<double> tape;
        auto x = Tensor::zeros({2}, true);
        CHECK_THROWS_AS(tape.backward(x), har::ShapeError);
    }
    SUBCASE("repeated backward accumulates") {
        Tape<double> tape;
        auto x = Tensor::from_values({2}, {1, 1}, true);
        auto loss = har::sum(tape, x);
        tape.backward(loss);
        tape.backward(loss);
        CHECK(x.grad() == std::vector<double>{2, 2});
    }
}

TEST_CASE("determinism: identical seeds give bitwise-identical outputs") {
    auto run = [](std::uint64_t seed) {
        Tape<double> tape;
        std::mt19937_64 rng(seed);
        auto x = Tensor::from_values({4, 4}, testutil::random_values(16, rng), true);
        auto y = har::dropout(tape, har::sigmoid(tape, x), 0.3, true, rng);
        auto loss = har::sum(tape, y);
        tape.backward(loss);
        return std::make_pair(loss.item(), x.grad());
    };
    auto a = run(5), b = run(5);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("opt-in finite check flags NaN") {
    Tape<double> tape;
    tape.set_check_finite(true);
    auto x = Tensor::from_values({1}, {1e308});
    auto y = Tensor::from_values({1}, {1e308});
    CHECK_THROWS_AS(har::mul(tape, x, y), har::NumericError);
    tape.set_check_finite(false);
    CHECK_NOTHROW(har::mul(tape, x, y));
}

TEST_CASE("structural ops slice and gather correctly") {
    Tape<double> tape;
    auto x = Tensor::from_values({2, 4}, {0, 1, 2, 3, 4, 5, 6, 7}, true);
    auto s = har::slice_cols(tape, x, 1, 2);
    CHECK(s.values() == std::vector<double>{1, 2, 5, 6});

    std::mt19937_64 rng(13);
    auto v = Tensor::from_values({2, 2, 3, 2}, testutil::random_values(24, rng), true);
    double err = testutil::max_grad_rel_error({v}, [&](Tape<double>& t) {
        auto f = har::timestep_features(t, v, 1);
        return har::sum(t, har::mul(t, f, f));
    });
    CHECK(err < 1e-4);
}

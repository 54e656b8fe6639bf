#pragma once

#include <cstdint>

namespace har {

// Closed-form learnable-parameter counts for the LSTM portion of the model,
// as a function of the input extent s and hidden units h.
//   1 layer:  p1 = 4sh + 4h + 4h^2
//   2 layers: p2 = 4sh + 8h + 12h^2  (second layer adds 8h^2 + 4h)
struct LstmCostModel {
    std::int64_t input_extent = 0;  // s
    std::int64_t hidden_units = 0;  // h

    LstmCostModel(std::int64_t s, std::int64_t h)
        : input_extent(s), hidden_units(h) {}

    std::int64_t p1() const {
        const std::int64_t s = input_extent, h = hidden_units;
        return 4 * s * h + 4 * h + 4 * h * h;
    }
    std::int64_t p2() const {
        const std::int64_t s = input_extent, h = hidden_units;
        return 4 * s * h + 8 * h + 12 * h * h;
    }
    std::int64_t delta() const { return p2() - p1(); }
    double reduction() const {
        return static_cast<double>(delta()) / static_cast<double>(p2());
    }
    std::int64_t params(int layers) const { return layers == 1 ? p1() : p2(); }
};

}  // namespace har

#include "core/optim.hpp"

namespace har {

std::vector<double> class_weights(const std::vector<int>& labels,
                                  int num_classes) {
    if (num_classes < 2) throw ConfigError("class_weights: need K >= 2");
    if (labels.empty()) throw DataError("class_weights: empty label sequence");
    std::vector<std::int64_t> counts(num_classes, 0);
    for (int l : labels) {
        if (l < 0 || l >= num_classes)
            throw DataError("class_weights: label out of range: " +
                            std::to_string(l));
        counts[l]++;
    }
    const double n = static_cast<double>(labels.size());
    std::vector<double> weights(num_classes, 0.0);
    double max_present = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        if (counts[c] > 0) {
            weights[c] = n / (static_cast<double>(num_classes) * counts[c]);
            max_present = std::max(max_present, weights[c]);
        }
    }
    for (int c = 0; c < num_classes; ++c)
        if (counts[c] == 0) weights[c] = max_present;
    return weights;
}

}  // namespace har

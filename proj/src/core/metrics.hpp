#pragma once

#include <cstdint>
#include <vector>

namespace har {

// Per-class and aggregate classification metrics. The 0/0 convention is 0
// throughout (a class with no support and no predictions scores 0 and still
// enters the macro mean).
struct MetricsRecord {
    int num_classes = 0;
    std::vector<std::int64_t> confusion;  // [K*K], row = true, col = predicted
    std::vector<std::int64_t> support;    // per-class true counts
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;

    std::int64_t at(int true_class, int pred_class) const {
        return confusion[static_cast<std::size_t>(true_class) * num_classes +
                         pred_class];
    }
};

MetricsRecord compute_metrics(const std::vector<int>& y_true,
                              const std::vector<int>& y_pred, int num_classes);

}  // namespace har

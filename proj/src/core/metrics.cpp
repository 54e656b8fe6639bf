#include "core/metrics.hpp"

#include <string>

#include "core/errors.hpp"

namespace har {

MetricsRecord compute_metrics(const std::vector<int>& y_true,
                              const std::vector<int>& y_pred,
                              int num_classes) {
    if (y_true.size() != y_pred.size())
        throw DataError("compute_metrics: length mismatch, " +
                        std::to_string(y_true.size()) + " labels vs " +
                        std::to_string(y_pred.size()) + " predictions");
    if (y_true.empty())
        throw DataError("compute_metrics: empty label sequence");
    if (num_classes < 1)
        throw DataError("compute_metrics: num_classes must be >= 1");

    MetricsRecord rec;
    rec.num_classes = num_classes;
    rec.confusion.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
    rec.support.assign(num_classes, 0);

    std::int64_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        int t = y_true[i], p = y_pred[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
            throw DataError("compute_metrics: label out of range at index " +
                            std::to_string(i));
        rec.confusion[static_cast<std::size_t>(t) * num_classes + p]++;
        rec.support[t]++;
        if (t == p) ++correct;
    }
    rec.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());

    rec.precision.assign(num_classes, 0.0);
    rec.recall.assign(num_classes, 0.0);
    rec.f1.assign(num_classes, 0.0);
    for (int c = 0; c < num_classes; ++c) {
        std::int64_t tp = rec.at(c, c);
        std::int64_t fp = 0, fn = 0;
        for (int o = 0; o < num_classes; ++o) {
            if (o == c) continue;
            fp += rec.at(o, c);
            fn += rec.at(c, o);
        }
        double p = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        double r = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        rec.precision[c] = p;
        rec.recall[c] = r;
        rec.f1[c] = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }

    const double total = static_cast<double>(y_true.size());
    for (int c = 0; c < num_classes; ++c) {
        rec.macro_precision += rec.precision[c];
        rec.macro_recall += rec.recall[c];
        rec.macro_f1 += rec.f1[c];
        const double w = static_cast<double>(rec.support[c]) / total;
        rec.weighted_precision += w * rec.precision[c];
        rec.weighted_recall += w * rec.recall[c];
        rec.weighted_f1 += w * rec.f1[c];
    }
    rec.macro_precision /= num_classes;
    rec.macro_recall /= num_classes;
    rec.macro_f1 /= num_classes;
    return rec;
}

}  // namespace har

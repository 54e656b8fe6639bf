#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "core/cost.hpp"
#include "core/data.hpp"
#include "core/optim.hpp"

namespace har {

struct Fold {
    int validation_subject;           // subject id within the dataset
    std::vector<int> train_subjects;  // all remaining subject ids
};

// One fold per subject; the validation subject is excluded from training in
// every fold. Requires at least 2 subjects.
std::vector<Fold> loso_folds(const WindowedDataset& dataset);

struct GridCell {
    int lstm_layers = 0;
    int hidden_units = 0;
    std::uint64_t seed = 0;
    int fold = 0;
    std::string validation_subject;
    int epochs_run = 0;
    double final_train_loss = 0.0;
    MetricsRecord train_final;
    MetricsRecord validation;
    std::int64_t lstm_param_total = 0;
    std::int64_t param_total = 0;
    double mean_epoch_seconds = 0.0;
    double total_seconds = 0.0;
};

// Mean/std over seeds (per fold), then mean over folds.
struct MetricSummary {
    double mean = 0.0;
    double std_over_seeds = 0.0;
};

struct VariantAggregate {
    int lstm_layers = 0;
    int hidden_units = 0;
    std::map<std::string, MetricSummary> metrics;  // validation metrics
    std::int64_t lstm_param_total = 0;
    double mean_epoch_seconds = 0.0;
};

struct EvaluationReport {
    std::vector<std::string> subjects;
    std::vector<std::uint64_t> seeds;
    std::vector<GridCell> cells;
    std::vector<VariantAggregate> aggregates;
};

// Validation metrics entering aggregation, in fixed column order.
std::vector<std::pair<std::string, double>> metric_values(
    const MetricsRecord& rec);

// Recompute aggregates from raw cells (the stored aggregates must match).
std::vector<VariantAggregate> compute_aggregates(const EvaluationReport& report);

// Serialization. Wall-clock measurements are kept out of the metric files so
// repeated runs with equal config and seed produce byte-identical reports.
nlohmann::json report_to_json(const EvaluationReport& report);
void write_report_json(const EvaluationReport& report,
                       const nlohmann::json& config_snapshot,
                       const std::string& path);
void write_cells_csv(const EvaluationReport& report, const std::string& path);
void write_timing_csv(const EvaluationReport& report, const std::string& path);
std::string summary_text(const EvaluationReport& report);
void atomic_write_text(const std::string& path, const std::string& content);

struct GridSpec {
    std::vector<int> lstm_layers = {1, 2};
    std::vector<int> hidden_units = {128, 256, 512, 1024};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace detail

// Full LOSO grid: variants (layers x hidden) x seeds x folds. Cells are
// independent jobs; `jobs` > 1 runs them on worker threads with results
// written by cell index, so the report is identical for any schedule.
template <typename Real>
EvaluationReport run_grid(const RawDataset& raw, const ModelConfig& base_model,
                          const TrainRunConfig& base_train,
                          const AdamConfig& adam_cfg, double window_seconds,
                          double overlap, WindowLabelMode label_mode,
                          NormScheme norm_scheme, const GridSpec& grid,
                          int jobs = 1) {
    // Fold structure comes from segmenting the raw data once.
    WindowedDataset probe = segment(raw, window_seconds, overlap, label_mode);
    std::vector<Fold> folds = loso_folds(probe);

    // Per-fold train/validation windows with leakage-free normalization.
    struct FoldData {
        WindowedDataset train;
        WindowedDataset validation;
    };
    std::vector<FoldData> fold_data(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::string> train_names;
        for (int sid : folds[f].train_subjects)
            train_names.push_back(probe.subjects[sid]);
        RawDataset normed = normalize(raw, train_names, norm_scheme);
        WindowedDataset all = segment(normed, window_seconds, overlap, label_mode);
        fold_data[f].train =
            all.filter_subjects({folds[f].validation_subject}, false);
        fold_data[f].validation =
            all.filter_subjects({folds[f].validation_subject}, true);
    }

    EvaluationReport report;
    report.subjects = probe.subjects;
    report.seeds = grid.seeds;

    struct CellJob {
        int layers;
        int hidden;
        std::uint64_t seed;
        std::size_t fold;
    };
    std::vector<CellJob> cell_jobs;
    for (int layers : grid.lstm_layers)
        for (int hidden : grid.hidden_units)
            for (std::uint64_t seed : grid.seeds)
                for (std::size_t f = 0; f < folds.size(); ++f)
                    cell_jobs.push_back({layers, hidden, seed, f});
    report.cells.resize(cell_jobs.size());

    auto run_cell = [&](std::size_t idx) {
        const CellJob& job = cell_jobs[idx];
        const FoldData& fd = fold_data[job.fold];

        ModelConfig cfg = base_model;
        cfg.lstm_layers = job.layers;
        cfg.hidden_units = job.hidden;
        cfg.num_classes = probe.num_classes;
        cfg.channels = probe.channels;
        cfg.window_samples = probe.window_samples;

        const std::uint64_t cell_seed = detail::mix_seed(job.seed, job.fold);
        auto model = DeepConvLstmModel<Real>::build(cfg, cell_seed);

        TrainRunConfig train_cfg = base_train;
        train_cfg.seed = cell_seed;
        TrainingTrace trace =
            train_epochs(model, fd.train, nullptr, train_cfg, adam_cfg);

        GridCell& cell = report.cells[idx];
        cell.lstm_layers = job.layers;
        cell.hidden_units = job.hidden;
        cell.seed = job.seed;
        cell.fold = static_cast<int>(job.fold);
        cell.validation_subject =
            probe.subjects[folds[job.fold].validation_subject];
        cell.epochs_run = static_cast<int>(trace.epochs.size());
        cell.final_train_loss = trace.epochs.back().loss;
        cell.train_final = trace.epochs.back().train;
        auto preds = predict(model, fd.validation, train_cfg.batch_size);
        cell.validation =
            compute_metrics(fd.validation.labels, preds, probe.num_classes);
        cell.lstm_param_total =
            static_cast<std::int64_t>(model.lstm_param_total());
        cell.param_total = static_cast<std::int64_t>(model.param_total());
        double total = 0.0;
        for (const auto& e : trace.epochs) total += e.epoch_seconds;
        cell.total_seconds = total;
        cell.mean_epoch_seconds = total / trace.epochs.size();
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < cell_jobs.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= cell_jobs.size()) return;
                run_cell(i);
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    report.aggregates = compute_aggregates(report);
    return report;
}

struct BenchRow {
    int hidden_units = 0;
    double epoch_seconds_one_layer = 0.0;
    double epoch_seconds_two_layer = 0.0;
    double ratio() const {
        return epoch_seconds_one_layer / epoch_seconds_two_layer;
    }
    double saving() const { return 1.0 - ratio(); }
};

// Median epoch time of the training loop over a fixed synthetic batch
// stream, for 1- vs 2-layer variants that differ in nothing else. Warmup
// epochs are discarded.
template <typename Real>
std::vector<BenchRow> benchmark_runtime(const ModelConfig& base_model,
                                        const WindowedDataset& stream,
                                        const std::vector<int>& hidden_list,
                                        int repetitions, int warmup,
                                        int batch_size) {
    if (repetitions < 1) throw ConfigError("bench: repetitions must be >= 1");
    auto time_variant = [&](int hidden, int layers) {
        ModelConfig cfg = base_model;
        cfg.lstm_layers = layers;
        cfg.hidden_units = hidden;
        cfg.num_classes = stream.num_classes;
        cfg.channels = stream.channels;
        cfg.window_samples = stream.window_samples;
        auto model = DeepConvLstmModel<Real>::build(cfg, 7);
        TrainRunConfig tc;
        tc.epochs = 1;
        tc.batch_size = batch_size;
        tc.seed = 7;
        tc.shuffle = false;  // identical work every epoch
        AdamConfig ac;
        std::vector<double> times;
        for (int r = 0; r < warmup + repetitions; ++r) {
            TrainingTrace trace = train_epochs(model, stream, nullptr, tc, ac);
            if (r >= warmup) times.push_back(trace.epochs.back().epoch_seconds);
        }
        std::sort(times.begin(), times.end());
        const std::size_t n = times.size();
        return n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
    };

    std::vector<BenchRow> rows;
    for (int hidden : hidden_list) {
        BenchRow row;
        row.hidden_units = hidden;
        row.epoch_seconds_one_layer = time_variant(hidden, 1);
        row.epoch_seconds_two_layer = time_variant(hidden, 2);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace har

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/data.hpp"
#include "core/eval.hpp"
#include "core/model.hpp"
#include "core/optim.hpp"

namespace har {

// Fully resolved experiment description. Defaults follow the training
// recipe of the reproduced setup: Adam lr 1e-4, weight decay 1e-6, dropout
// 0.5, 4 conv layers, 64 filters, 1 s windows with 60% overlap (the
// "opportunity" profile switches to 0.5 s / 50%), kernel length 11 at 50 Hz
// and 21 at 100 Hz.
struct ExperimentConfig {
    // dataset
    std::string source = "synthetic";  // "synthetic" | "csv"
    std::string csv_path;
    double sampling_rate = 50.0;
    SynthConfig synth;

    // windowing + preprocessing
    std::string profile = "default";  // "default" | "opportunity"
    double window_seconds = 1.0;
    double overlap = 0.6;
    WindowLabelMode label_mode = WindowLabelMode::kLastSample;
    NormScheme norm_scheme = NormScheme::kZScore;

    // architecture (num_classes/channels/window_samples are data-derived)
    ModelConfig model;

    // training
    TrainRunConfig train;
    AdamConfig adam;
    std::string precision = "float32";  // "float32" | "float64"

    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    GridSpec grid;

    // benchmark
    std::vector<int> bench_hidden = {128, 1024};
    int bench_repetitions = 5;
    int bench_warmup = 1;
    int bench_windows = 16;
    int bench_batch_size = 8;

    // output
    std::string out_dir = "out";
    std::vector<std::string> formats = {"csv", "structured"};
    int jobs = 1;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json resolved() const;
    void validate() const;
    std::string config_hash() const;
};

// Dotted-path override helper ("train.epochs" -> {"train":{"epochs":...}}).
// The value string is parsed as JSON when possible, else taken verbatim.
void set_dotted(nlohmann::json& target, const std::string& dotted_key,
                const std::string& value);

// Command entry points used by the C API. Each writes its artifacts under
// cfg.out_dir with atomic renames and embeds the resolved config.
void run_synth(const ExperimentConfig& cfg);
void run_train(const ExperimentConfig& cfg);
void run_loso_grid(const ExperimentConfig& cfg);
void run_bench(const ExperimentConfig& cfg);

// Cost-model table: one row per (s, h) with p1, p2, delta, reduction.
// Returns the grid mean reduction; optionally writes the CSV.
double run_analyze(const std::vector<std::int64_t>& s_values,
                   const std::vector<std::int64_t>& h_values,
                   const std::string& out_csv_path /* empty = stdout only */);

std::string machine_descriptor();

}  // namespace har

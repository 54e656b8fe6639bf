// Command-line front end for the harlstm shared library. Everything goes
// through the public C API; flag > config file > built-in default.
#include <cstdio>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harlstm/harlstm.h"

namespace {

struct ExperimentDeleter {
    void operator()(har_experiment* e) const { har_experiment_destroy(e); }
};
using ExperimentPtr = std::unique_ptr<har_experiment, ExperimentDeleter>;

template <typename T>
std::string json_list(const std::vector<T>& values) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        os << values[i];
    }
    os << ']';
    return os.str();
}

int fail(const har_experiment* exp, har_status status) {
    std::fprintf(stderr, "error: %s\n", har_experiment_last_error(exp));
    return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DeepConvLSTM activity-recognition engine (1- vs 2-layer "
                 "LSTM variants)"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_csv, precision;
    std::vector<std::uint64_t> seeds;
    std::vector<int> hidden;
    std::vector<int> lstm_layers;
    std::vector<std::string> formats;
    std::vector<std::string> overrides;
    int jobs = 0, epochs = 0, batch_size = 0, repetitions = 0;
    double rate = 0.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON experiment config file");
        cmd->add_option("--out", out_dir, "output directory")
            ->envname("HARLSTM_OUT_DIR");
        cmd->add_option("--set", overrides,
                        "extra config override as dotted.key=value");
    };

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset CSV");
    add_common(synth);
    int synth_subjects = 0, synth_classes = 0, synth_channels = 0;
    double synth_duration = 0.0;
    std::uint64_t synth_seed = 0;
    bool synth_seed_set = false;
    synth->add_option("--subjects", synth_subjects, "number of subjects");
    synth->add_option("--classes", synth_classes, "number of activity classes");
    synth->add_option("--channels", synth_channels, "number of sensor channels");
    synth->add_option("--duration", synth_duration, "seconds per subject");
    synth->add_option("--rate", rate, "sampling rate in Hz");
    synth->add_option("--seed", synth_seed, "generator seed")
        ->each([&](const std::string&) { synth_seed_set = true; });

    auto* train = app.add_subcommand("train", "train one model on a holdout split");
    add_common(train);
    train->add_option("--data", data_csv, "dataset CSV (subject,<ch...>,label)");
    train->add_option("--rate", rate, "sampling rate in Hz");
    train->add_option("--seeds,--seed", seeds,
                      "random seed(s); first one is used")
        ->delimiter(',');
    train->add_option("--hidden", hidden, "LSTM hidden units")->delimiter(',');
    train->add_option("--lstm-layers", lstm_layers, "LSTM depth (1 or 2)")
        ->delimiter(',');
    train->add_option("--epochs", epochs, "training epochs");
    train->add_option("--batch-size", batch_size, "mini-batch size");
    train->add_option("--precision", precision, "float32 or float64");

    auto* grid = app.add_subcommand(
        "loso-grid", "leave-one-subject-out grid over layers x hidden x seeds");
    add_common(grid);
    grid->add_option("--data", data_csv, "dataset CSV");
    grid->add_option("--rate", rate, "sampling rate in Hz");
    grid->add_option("--seeds", seeds, "random seeds")->delimiter(',');
    grid->add_option("--hidden", hidden, "hidden-unit grid")->delimiter(',');
    grid->add_option("--lstm-layers", lstm_layers, "LSTM depth grid")
        ->delimiter(',');
    grid->add_option("--epochs", epochs, "training epochs per cell");
    grid->add_option("--batch-size", batch_size, "mini-batch size");
    grid->add_option("--jobs", jobs, "parallel grid cells");
    grid->add_option("--format", formats, "output formats: csv, structured")
        ->delimiter(',');
    grid->add_option("--precision", precision, "float32 or float64");

    auto* analyze = app.add_subcommand(
        "analyze", "closed-form LSTM parameter counts p1/p2 per (s,h)");
    // long-form --help only: the default -h short flag collides with --h
    analyze->set_help_flag("--help", "print help");
    std::vector<std::int64_t> s_list, h_list;
    std::string analyze_csv;
    analyze->add_option("--s", s_list, "LSTM input extents")
        ->delimiter(',')->required();
    analyze->add_option("--h", h_list, "hidden-unit values")
        ->delimiter(',')->required();
    analyze->add_option("--out-csv", analyze_csv, "also write the table as CSV");

    auto* bench = app.add_subcommand(
        "bench", "per-epoch runtime of 1- vs 2-layer variants");
    add_common(bench);
    bench->add_option("--hidden", hidden, "hidden-unit values to benchmark")
        ->delimiter(',');
    bench->add_option("--repetitions", repetitions, "timed epochs per variant");
    bench->add_option("--precision", precision, "float32 or float64");

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) {
        double mean = 0.0;
        har_status status = har_analyze_costs(
            s_list.data(), static_cast<int>(s_list.size()), h_list.data(),
            static_cast<int>(h_list.size()),
            analyze_csv.empty() ? nullptr : analyze_csv.c_str(), &mean);
        if (status != HAR_OK) {
            std::fprintf(stderr, "error: invalid analyze arguments\n");
            return static_cast<int>(status);
        }
        return 0;
    }

    ExperimentPtr exp(har_experiment_create());
    if (!config_path.empty()) {
        har_status status =
            har_experiment_load_config(exp.get(), config_path.c_str());
        if (status != HAR_OK) return fail(exp.get(), status);
    }

    auto set = [&](const char* key, const std::string& value) -> bool {
        return har_experiment_set(exp.get(), key, value.c_str()) == HAR_OK;
    };
    if (!out_dir.empty()) set("output.dir", out_dir);
    if (!data_csv.empty()) {
        set("dataset.source", "csv");
        set("dataset.csv_path", data_csv);
    }
    if (rate > 0.0) set("dataset.sampling_rate", std::to_string(rate));
    if (!seeds.empty()) set("seeds", json_list(seeds));
    if (epochs > 0) set("train.epochs", std::to_string(epochs));
    if (batch_size > 0) set("train.batch_size", std::to_string(batch_size));
    if (!precision.empty()) set("train.precision", precision);
    if (jobs > 0) set("jobs", std::to_string(jobs));
    if (!formats.empty()) {
        std::vector<std::string> quoted;
        for (const auto& f : formats) quoted.push_back('"' + f + '"');
        set("output.formats", json_list(quoted));
    }
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --set expects dotted.key=value, got %s\n",
                         kv.c_str());
            return static_cast<int>(HAR_ERROR_CONFIG);
        }
        if (!set(kv.substr(0, eq).c_str(), kv.substr(eq + 1)))
            return fail(exp.get(), HAR_ERROR_CONFIG);
    }

    har_status status = HAR_OK;
    if (synth->parsed()) {
        if (synth_subjects > 0)
            set("dataset.synthetic.subjects", std::to_string(synth_subjects));
        if (synth_classes > 0)
            set("dataset.synthetic.classes", std::to_string(synth_classes));
        if (synth_channels > 0)
            set("dataset.synthetic.channels", std::to_string(synth_channels));
        if (synth_duration > 0.0)
            set("dataset.synthetic.duration_seconds",
                std::to_string(synth_duration));
        if (synth_seed_set)
            set("dataset.synthetic.seed", std::to_string(synth_seed));
        status = har_experiment_run_synth(exp.get());
    } else if (train->parsed()) {
        if (!hidden.empty())
            set("model.hidden_units", std::to_string(hidden.front()));
        if (!lstm_layers.empty())
            set("model.lstm_layers", std::to_string(lstm_layers.front()));
        status = har_experiment_run_train(exp.get());
    } else if (grid->parsed()) {
        if (!hidden.empty()) set("grid.hidden_units", json_list(hidden));
        if (!lstm_layers.empty()) set("grid.lstm_layers", json_list(lstm_layers));
        status = har_experiment_run_loso_grid(exp.get());
    } else if (bench->parsed()) {
        if (!hidden.empty()) set("bench.hidden_units", json_list(hidden));
        if (repetitions > 0)
            set("bench.repetitions", std::to_string(repetitions));
        status = har_experiment_run_bench(exp.get());
    }
    if (status != HAR_OK) return fail(exp.get(), status);
    return 0;
}

#include "core/experiment.hpp"

#include <sys/utsname.h>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <thread>

#include "core/checkpoint.hpp"
#include "core/cost.hpp"

namespace har {

namespace {

int default_kernel_len(double sampling_rate) {
    // Filter length tracks the sampling rate so each filter spans the same
    // fraction of a 1-second window: 11 at 50 Hz, 21 at 100 Hz.
    return sampling_rate >= 100.0 ? 21 : 11;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (j.is_object() && j.contains(key)) return j.at(key).get<T>();
    return fallback;
}

const nlohmann::json kEmpty = nlohmann::json::object();

const nlohmann::json& section(const nlohmann::json& j, const char* key) {
    if (j.is_object() && j.contains(key)) return j.at(key);
    return kEmpty;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;

    const auto& dataset = section(j, "dataset");
    cfg.source = get_or<std::string>(dataset, "source", cfg.source);
    cfg.csv_path = get_or<std::string>(dataset, "csv_path", cfg.csv_path);
    cfg.sampling_rate = get_or(dataset, "sampling_rate", cfg.sampling_rate);
    const auto& synth = section(dataset, "synthetic");
    cfg.synth.num_subjects = get_or(synth, "subjects", cfg.synth.num_subjects);
    cfg.synth.num_classes = get_or(synth, "classes", cfg.synth.num_classes);
    cfg.synth.channels = get_or(synth, "channels", cfg.synth.channels);
    cfg.synth.duration_seconds =
        get_or(synth, "duration_seconds", cfg.synth.duration_seconds);
    cfg.synth.seed = get_or(synth, "seed", cfg.synth.seed);
    cfg.synth.sampling_rate = cfg.sampling_rate;

    const auto& window = section(j, "window");
    cfg.profile = get_or<std::string>(window, "profile", cfg.profile);
    if (cfg.profile == "opportunity") {
        cfg.window_seconds = 0.5;
        cfg.overlap = 0.5;
    } else if (cfg.profile != "default") {
        throw ConfigError("window.profile: unknown profile '" + cfg.profile +
                          "' (expected 'default' or 'opportunity')");
    }
    cfg.window_seconds = get_or(window, "seconds", cfg.window_seconds);
    cfg.overlap = get_or(window, "overlap", cfg.overlap);
    const std::string label_mode =
        get_or<std::string>(window, "label_mode", "last");
    if (label_mode == "last")
        cfg.label_mode = WindowLabelMode::kLastSample;
    else if (label_mode == "majority")
        cfg.label_mode = WindowLabelMode::kMajority;
    else
        throw ConfigError("window.label_mode: expected 'last' or 'majority'");

    const std::string scheme = get_or<std::string>(
        section(j, "normalize"), "scheme", "zscore");
    if (scheme == "zscore")
        cfg.norm_scheme = NormScheme::kZScore;
    else if (scheme == "minmax")
        cfg.norm_scheme = NormScheme::kMinMax;
    else if (scheme == "none")
        cfg.norm_scheme = NormScheme::kNone;
    else
        throw ConfigError("normalize.scheme: expected zscore, minmax or none");

    const auto& model = section(j, "model");
    cfg.model.num_conv_layers =
        get_or(model, "conv_layers", cfg.model.num_conv_layers);
    cfg.model.num_filters = get_or(model, "filters", cfg.model.num_filters);
    cfg.model.kernel_len =
        get_or(model, "kernel_len", default_kernel_len(cfg.sampling_rate));
    cfg.model.lstm_layers = get_or(model, "lstm_layers", cfg.model.lstm_layers);
    cfg.model.hidden_units =
        get_or(model, "hidden_units", cfg.model.hidden_units);
    cfg.model.dropout_p = get_or(model, "dropout", cfg.model.dropout_p);

    const auto& train = section(j, "train");
    cfg.train.epochs = get_or(train, "epochs", cfg.train.epochs);
    cfg.train.batch_size = get_or(train, "batch_size", cfg.train.batch_size);
    cfg.train.shuffle = get_or(train, "shuffle", cfg.train.shuffle);
    cfg.adam.lr = get_or(train, "lr", cfg.adam.lr);
    cfg.adam.weight_decay =
        get_or(train, "weight_decay", cfg.adam.weight_decay);
    cfg.adam.decoupled_decay =
        get_or(train, "decoupled_weight_decay", cfg.adam.decoupled_decay);
    const std::string weighting =
        get_or<std::string>(train, "loss_weighting", "inverse_frequency");
    if (weighting == "inverse_frequency")
        cfg.train.weighting = LossWeighting::kInverseFrequency;
    else if (weighting == "none")
        cfg.train.weighting = LossWeighting::kNone;
    else
        throw ConfigError(
            "train.loss_weighting: expected inverse_frequency or none");
    cfg.precision = get_or<std::string>(train, "precision", cfg.precision);

    cfg.seeds = get_or(j, "seeds", cfg.seeds);
    if (!cfg.seeds.empty()) cfg.train.seed = cfg.seeds.front();

    const auto& grid = section(j, "grid");
    cfg.grid.hidden_units =
        get_or(grid, "hidden_units", cfg.grid.hidden_units);
    cfg.grid.lstm_layers = get_or(grid, "lstm_layers", cfg.grid.lstm_layers);
    cfg.grid.seeds = cfg.seeds;

    const auto& bench = section(j, "bench");
    cfg.bench_hidden = get_or(bench, "hidden_units", cfg.bench_hidden);
    cfg.bench_repetitions =
        get_or(bench, "repetitions", cfg.bench_repetitions);
    cfg.bench_warmup = get_or(bench, "warmup", cfg.bench_warmup);
    cfg.bench_windows = get_or(bench, "windows", cfg.bench_windows);
    cfg.bench_batch_size = get_or(bench, "batch_size", cfg.bench_batch_size);

    const auto& output = section(j, "output");
    cfg.out_dir = get_or<std::string>(output, "dir", cfg.out_dir);
    cfg.formats = get_or(output, "formats", cfg.formats);
    cfg.jobs = get_or(j, "jobs", cfg.jobs);

    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    if (source != "synthetic" && source != "csv")
        throw ConfigError("dataset.source: expected 'synthetic' or 'csv'");
    if (source == "csv" && csv_path.empty())
        throw ConfigError("dataset.csv_path: required when source is 'csv'");
    if (sampling_rate <= 0.0)
        throw ConfigError("dataset.sampling_rate: must be positive");
    if (window_seconds <= 0.0)
        throw ConfigError("window.seconds: must be positive");
    if (overlap < 0.0 || overlap >= 1.0)
        throw ConfigError("overlap: must lie in [0,1)");
    if (model.num_conv_layers < 1)
        throw ConfigError("model.conv_layers: must be >= 1");
    if (model.num_filters < 1) throw ConfigError("model.filters: must be >= 1");
    if (model.kernel_len < 1) throw ConfigError("model.kernel_len: must be >= 1");
    if (model.lstm_layers != 1 && model.lstm_layers != 2)
        throw ConfigError("model.lstm_layers: must be 1 or 2");
    if (model.hidden_units < 1)
        throw ConfigError("model.hidden_units: must be >= 1");
    if (model.dropout_p < 0.0 || model.dropout_p >= 1.0)
        throw ConfigError("model.dropout: must lie in [0,1)");
    if (train.epochs < 1) throw ConfigError("train.epochs: must be >= 1");
    if (train.batch_size < 1)
        throw ConfigError("train.batch_size: must be >= 1");
    if (adam.lr <= 0.0) throw ConfigError("train.lr: must be positive");
    if (adam.weight_decay < 0.0)
        throw ConfigError("train.weight_decay: must be >= 0");
    if (precision != "float32" && precision != "float64")
        throw ConfigError("train.precision: expected float32 or float64");
    if (seeds.empty()) throw ConfigError("seeds: must not be empty");
    if (grid.hidden_units.empty())
        throw ConfigError("grid.hidden_units: must not be empty");
    for (int l : grid.lstm_layers)
        if (l != 1 && l != 2)
            throw ConfigError("grid.lstm_layers: entries must be 1 or 2");
    if (bench_repetitions < 1)
        throw ConfigError("bench.repetitions: must be >= 1");
    if (jobs < 1) throw ConfigError("jobs: must be >= 1");
    if (out_dir.empty()) throw ConfigError("output.dir: must not be empty");
}

nlohmann::json ExperimentConfig::resolved() const {
    nlohmann::json j;
    j["dataset"]["source"] = source;
    j["dataset"]["csv_path"] = csv_path;
    j["dataset"]["sampling_rate"] = sampling_rate;
    j["dataset"]["synthetic"] = {{"subjects", synth.num_subjects},
                                 {"classes", synth.num_classes},
                                 {"channels", synth.channels},
                                 {"duration_seconds", synth.duration_seconds},
                                 {"seed", synth.seed}};
    j["window"]["profile"] = profile;
    j["window"]["seconds"] = window_seconds;
    j["window"]["overlap"] = overlap;
    j["window"]["label_mode"] =
        label_mode == WindowLabelMode::kLastSample ? "last" : "majority";
    j["normalize"]["scheme"] = norm_scheme == NormScheme::kZScore ? "zscore"
                               : norm_scheme == NormScheme::kMinMax ? "minmax"
                                                                    : "none";
    j["model"] = {{"conv_layers", model.num_conv_layers},
                  {"filters", model.num_filters},
                  {"kernel_len", model.kernel_len},
                  {"lstm_layers", model.lstm_layers},
                  {"hidden_units", model.hidden_units},
                  {"dropout", model.dropout_p}};
    j["train"] = {{"epochs", train.epochs},
                  {"batch_size", train.batch_size},
                  {"shuffle", train.shuffle},
                  {"lr", adam.lr},
                  {"weight_decay", adam.weight_decay},
                  {"decoupled_weight_decay", adam.decoupled_decay},
                  {"loss_weighting",
                   train.weighting == LossWeighting::kInverseFrequency
                       ? "inverse_frequency"
                       : "none"},
                  {"precision", precision}};
    j["seeds"] = seeds;
    j["grid"] = {{"hidden_units", grid.hidden_units},
                 {"lstm_layers", grid.lstm_layers}};
    j["bench"] = {{"hidden_units", bench_hidden},
                  {"repetitions", bench_repetitions},
                  {"warmup", bench_warmup},
                  {"windows", bench_windows},
                  {"batch_size", bench_batch_size}};
    j["output"] = {{"dir", out_dir}, {"formats", formats}};
    j["jobs"] = jobs;
    return j;
}

std::string ExperimentConfig::config_hash() const {
    const std::string s = resolved().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

void set_dotted(nlohmann::json& target, const std::string& dotted_key,
                const std::string& value) {
    nlohmann::json* node = &target;
    std::size_t pos = 0;
    for (;;) {
        std::size_t dot = dotted_key.find('.', pos);
        std::string part = dotted_key.substr(
            pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty()) throw ConfigError("empty key segment in override");
        if (dot == std::string::npos) {
            nlohmann::json parsed =
                nlohmann::json::parse(value, nullptr, false);
            (*node)[part] = parsed.is_discarded() ? nlohmann::json(value)
                                                  : parsed;
            return;
        }
        node = &(*node)[part];
        pos = dot + 1;
    }
}

namespace {

RawDataset load_raw(const ExperimentConfig& cfg) {
    if (cfg.source == "csv") {
        CsvSchema schema;
        schema.sampling_rate = cfg.sampling_rate;
        return load_csv(cfg.csv_path, schema);
    }
    SynthConfig sc = cfg.synth;
    sc.sampling_rate = cfg.sampling_rate;
    return synth_generate(sc);
}

nlohmann::json epoch_to_json(const EpochStats& stats, bool with_timing) {
    nlohmann::json j;
    j["epoch"] = stats.epoch;
    j["loss"] = stats.loss;
    j["train"] = {{"accuracy", stats.train.accuracy},
                  {"macro_precision", stats.train.macro_precision},
                  {"macro_recall", stats.train.macro_recall},
                  {"macro_f1", stats.train.macro_f1},
                  {"weighted_f1", stats.train.weighted_f1}};
    if (stats.validation) {
        j["validation"] = {
            {"accuracy", stats.validation->accuracy},
            {"macro_precision", stats.validation->macro_precision},
            {"macro_recall", stats.validation->macro_recall},
            {"macro_f1", stats.validation->macro_f1},
            {"weighted_f1", stats.validation->weighted_f1}};
    }
    if (with_timing) j["epoch_seconds"] = stats.epoch_seconds;
    return j;
}

nlohmann::json full_metrics_json(const MetricsRecord& rec) {
    nlohmann::json j;
    j["accuracy"] = rec.accuracy;
    j["precision"] = rec.precision;
    j["recall"] = rec.recall;
    j["f1"] = rec.f1;
    j["macro_precision"] = rec.macro_precision;
    j["macro_recall"] = rec.macro_recall;
    j["macro_f1"] = rec.macro_f1;
    j["weighted_precision"] = rec.weighted_precision;
    j["weighted_recall"] = rec.weighted_recall;
    j["weighted_f1"] = rec.weighted_f1;
    j["support"] = rec.support;
    j["confusion"] = rec.confusion;
    return j;
}

template <typename Real>
void run_train_impl(const ExperimentConfig& cfg) {
    RawDataset raw = load_raw(cfg);

    // Hold out the last subject when there are several; otherwise the
    // trailing 20% of windows of the single stream.
    WindowedDataset probe =
        segment(raw, cfg.window_seconds, cfg.overlap, cfg.label_mode);
    WindowedDataset train_set, holdout_set;
    if (probe.subjects.size() >= 2) {
        const int holdout_subject = static_cast<int>(probe.subjects.size()) - 1;
        std::vector<std::string> train_names(probe.subjects.begin(),
                                             probe.subjects.end() - 1);
        RawDataset normed = normalize(raw, train_names, cfg.norm_scheme);
        WindowedDataset all =
            segment(normed, cfg.window_seconds, cfg.overlap, cfg.label_mode);
        train_set = all.filter_subjects({holdout_subject}, false);
        holdout_set = all.filter_subjects({holdout_subject}, true);
    } else {
        RawDataset normed = normalize(raw, probe.subjects, cfg.norm_scheme);
        WindowedDataset all =
            segment(normed, cfg.window_seconds, cfg.overlap, cfg.label_mode);
        std::vector<std::size_t> train_idx, hold_idx;
        const std::size_t split = all.size() - all.size() / 5;
        for (std::size_t i = 0; i < all.size(); ++i)
            (i < split ? train_idx : hold_idx).push_back(i);
        train_set = all.subset(train_idx);
        holdout_set = all.subset(hold_idx);
    }

    ModelConfig mc = cfg.model;
    mc.num_classes = train_set.num_classes;
    mc.channels = train_set.channels;
    mc.window_samples = train_set.window_samples;
    mc.validate();

    const std::uint64_t seed = cfg.seeds.front();
    auto model = DeepConvLstmModel<Real>::build(mc, seed);
    TrainRunConfig tc = cfg.train;
    tc.seed = seed;
    TrainingTrace trace =
        train_epochs(model, train_set, &holdout_set, tc, cfg.adam);

    std::filesystem::create_directories(cfg.out_dir);
    save_checkpoint(model, cfg.out_dir + "/checkpoint.bin");

    std::ostringstream trace_os;
    for (const auto& e : trace.epochs)
        trace_os << epoch_to_json(e, true).dump() << '\n';
    atomic_write_text(cfg.out_dir + "/trace.jsonl", trace_os.str());

    const auto& last = trace.epochs.back();
    nlohmann::json metrics;
    metrics["config"] = cfg.resolved();
    metrics["config_hash"] = cfg.config_hash();
    metrics["seed"] = seed;
    metrics["epochs_run"] = trace.epochs.size();
    metrics["final_train_loss"] = last.loss;
    metrics["train"] = full_metrics_json(last.train);
    if (last.validation)
        metrics["holdout"] = full_metrics_json(*last.validation);
    metrics["parameter_total"] = model.param_total();
    metrics["lstm_parameter_total"] = model.lstm_param_total();
    atomic_write_text(cfg.out_dir + "/metrics.json", metrics.dump(2) + "\n");

    std::printf("train: %d epochs, final loss %.4f, train macro F1 %.4f",
                static_cast<int>(trace.epochs.size()), last.loss,
                last.train.macro_f1);
    if (last.validation)
        std::printf(", holdout macro F1 %.4f", last.validation->macro_f1);
    std::printf("\nartifacts: %s/{metrics.json,trace.jsonl,checkpoint.bin}\n",
                cfg.out_dir.c_str());
}

template <typename Real>
void run_loso_grid_impl(const ExperimentConfig& cfg) {
    RawDataset raw = load_raw(cfg);
    EvaluationReport report = run_grid<Real>(
        raw, cfg.model, cfg.train, cfg.adam, cfg.window_seconds, cfg.overlap,
        cfg.label_mode, cfg.norm_scheme, cfg.grid, cfg.jobs);

    std::filesystem::create_directories(cfg.out_dir);
    nlohmann::json snapshot = cfg.resolved();
    snapshot["config_hash"] = cfg.config_hash();
    for (const std::string& fmt : cfg.formats) {
        if (fmt == "structured")
            write_report_json(report, snapshot, cfg.out_dir + "/report.json");
        else if (fmt == "csv")
            write_cells_csv(report, cfg.out_dir + "/cells.csv");
        else
            throw ConfigError("output.formats: unknown format '" + fmt + "'");
    }
    write_timing_csv(report, cfg.out_dir + "/timing.csv");
    const std::string summary = summary_text(report);
    atomic_write_text(cfg.out_dir + "/summary.txt", summary);
    std::fputs(summary.c_str(), stdout);
    std::printf("\n%zu grid cells written under %s\n", report.cells.size(),
                cfg.out_dir.c_str());
}

template <typename Real>
void run_bench_impl(const ExperimentConfig& cfg) {
    // Fixed synthetic stream sized to the requested number of windows.
    SynthConfig sc = cfg.synth;
    sc.num_subjects = 1;
    sc.sampling_rate = cfg.sampling_rate;
    const double s_w = cfg.window_seconds * cfg.sampling_rate;
    const double stride = std::max(1.0, s_w * (1.0 - cfg.overlap));
    sc.duration_seconds =
        (cfg.bench_windows * stride + s_w + stride) / cfg.sampling_rate;
    RawDataset raw = synth_generate(sc);
    WindowedDataset stream =
        segment(raw, cfg.window_seconds, cfg.overlap, cfg.label_mode);
    std::vector<std::size_t> first(
        std::min<std::size_t>(stream.size(), cfg.bench_windows));
    for (std::size_t i = 0; i < first.size(); ++i) first[i] = i;
    stream = stream.subset(first);

    if (cfg.bench_repetitions < 2)
        std::fprintf(stderr,
                     "warning: bench with %d repetition(s) is noise-prone; "
                     "consider >= 5\n",
                     cfg.bench_repetitions);

    auto rows = benchmark_runtime<Real>(cfg.model, stream, cfg.bench_hidden,
                                        cfg.bench_repetitions, cfg.bench_warmup,
                                        cfg.bench_batch_size);

    std::ostringstream os;
    os << "hidden_units,epoch_seconds_1l,epoch_seconds_2l,ratio_1l_over_2l,"
          "saving\n";
    for (const auto& row : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f,%.6f\n",
                      row.hidden_units, row.epoch_seconds_one_layer,
                      row.epoch_seconds_two_layer, row.ratio(), row.saving());
        os << line;
    }
    std::filesystem::create_directories(cfg.out_dir);
    atomic_write_text(cfg.out_dir + "/bench.csv", os.str());

    std::printf("machine: %s\n", machine_descriptor().c_str());
    std::printf("repetitions: %d (median, %d warmup discarded)\n",
                cfg.bench_repetitions, cfg.bench_warmup);
    std::printf("config_hash: %s\n", cfg.config_hash().c_str());
    std::printf("%s", os.str().c_str());
    std::printf("bench table written to %s/bench.csv\n", cfg.out_dir.c_str());
}

}  // namespace

void run_synth(const ExperimentConfig& cfg) {
    SynthConfig sc = cfg.synth;
    sc.sampling_rate = cfg.sampling_rate;
    RawDataset raw = synth_generate(sc);
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/synthetic.csv";
    write_csv(raw, path);
    std::size_t total = 0;
    for (const auto& s : raw.streams) total += s.length();
    std::printf("synthetic dataset: %d subjects, %d classes, %zu samples -> %s\n",
                sc.num_subjects, sc.num_classes, total, path.c_str());
}

void run_train(const ExperimentConfig& cfg) {
    if (cfg.precision == "float64")
        run_train_impl<double>(cfg);
    else
        run_train_impl<float>(cfg);
}

void run_loso_grid(const ExperimentConfig& cfg) {
    if (cfg.precision == "float64")
        run_loso_grid_impl<double>(cfg);
    else
        run_loso_grid_impl<float>(cfg);
}

void run_bench(const ExperimentConfig& cfg) {
    if (cfg.precision == "float64")
        run_bench_impl<double>(cfg);
    else
        run_bench_impl<float>(cfg);
}

double run_analyze(const std::vector<std::int64_t>& s_values,
                   const std::vector<std::int64_t>& h_values,
                   const std::string& out_csv_path) {
    if (s_values.empty()) throw ConfigError("analyze: s list must not be empty");
    if (h_values.empty()) throw ConfigError("analyze: h list must not be empty");
    for (auto v : s_values)
        if (v < 1) throw ConfigError("analyze: s values must be positive");
    for (auto v : h_values)
        if (v < 1) throw ConfigError("analyze: h values must be positive");

    std::ostringstream os;
    os << "s,h,p1,p2,delta,reduction\n";
    double reduction_sum = 0.0;
    std::size_t count = 0;
    for (auto s : s_values)
        for (auto h : h_values) {
            LstmCostModel cm(s, h);
            char line[160];
            std::snprintf(line, sizeof(line),
                          "%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64
                          ",%" PRId64 ",%.6f\n",
                          s, h, cm.p1(), cm.p2(), cm.delta(), cm.reduction());
            os << line;
            reduction_sum += cm.reduction();
            ++count;
        }
    const double mean = reduction_sum / static_cast<double>(count);
    std::printf("%s", os.str().c_str());
    std::printf("grid mean reduction: %.1f%%\n", 100.0 * mean);
    if (!out_csv_path.empty()) atomic_write_text(out_csv_path, os.str());
    return mean;
}

std::string machine_descriptor() {
    utsname info{};
    uname(&info);
    std::ostringstream os;
    os << info.sysname << ' ' << info.release << ' ' << info.machine << ", "
       << std::thread::hardware_concurrency() << " hardware thread(s)";
    return os.str();
}

}  // namespace har

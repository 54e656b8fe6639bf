#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace har {

// Raw per-subject sample streams. A stream is one contiguous recording;
// windows never cross stream boundaries.
struct RawDataset {
    struct Stream {
        std::string subject;
        // length T*C, row-major (sample-major)
        std::vector<double> samples;
        std::vector<int> labels;  // length T
        std::size_t length() const { return labels.size(); }
    };

    double sampling_rate = 0.0;
    int channels = 0;
    std::vector<std::string> class_names;
    std::vector<Stream> streams;

    int num_classes() const { return static_cast<int>(class_names.size()); }
};

enum class WindowLabelMode { kLastSample, kMajority };

// Segmented windows ready for training. data is [N, window_samples, channels].
struct WindowedDataset {
    int window_samples = 0;
    int channels = 0;
    int num_classes = 0;
    double window_seconds = 0.0;
    double overlap = 0.0;
    std::vector<std::string> subjects;  // id -> name
    std::vector<double> data;
    std::vector<int> labels;
    std::vector<int> subject_of;

    std::size_t size() const { return labels.size(); }
    const double* window(std::size_t i) const {
        return data.data() +
               i * static_cast<std::size_t>(window_samples) * channels;
    }
    WindowedDataset subset(const std::vector<std::size_t>& indices) const;
    // All windows whose subject id is (not) in the given set.
    WindowedDataset filter_subjects(const std::vector<int>& subject_ids,
                                    bool keep) const;
};

struct CsvSchema {
    double sampling_rate = 50.0;
    // When set, labels must come from this table; otherwise string labels are
    // mapped in first-appearance order.
    std::optional<std::vector<std::string>> class_table;
};

RawDataset load_csv(const std::string& path, const CsvSchema& schema);
void write_csv(const RawDataset& raw, const std::string& path);

WindowedDataset segment(const RawDataset& raw, double window_seconds,
                        double overlap,
                        WindowLabelMode mode = WindowLabelMode::kLastSample);

enum class NormScheme { kZScore, kMinMax, kNone };

// Per-channel normalization with statistics computed only from the streams
// of the named subjects (leakage-free when given the training subjects).
RawDataset normalize(const RawDataset& raw,
                     const std::vector<std::string>& stats_subjects,
                     NormScheme scheme = NormScheme::kZScore);

struct SynthConfig {
    int num_subjects = 4;
    int num_classes = 3;
    int channels = 3;
    double sampling_rate = 50.0;
    double duration_seconds = 60.0;
    std::uint64_t seed = 1;
};

// Synthetic HAR-like streams: each class is a distinct sinusoid family
// (frequency/amplitude signature) with per-subject random phase and gain,
// chopped into activity segments of random duration, plus Gaussian noise.
RawDataset synth_generate(const SynthConfig& cfg);

}  // namespace har

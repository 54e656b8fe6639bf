#include "core/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "core/errors.hpp"

namespace har {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_channel_value(const std::string& s, std::size_t line_no) {
    double v;
    auto first = s.data();
    auto last = s.data() + s.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw DataError("csv: non-numeric channel value '" + s + "' at line " +
                        std::to_string(line_no));
    return v;
}

}  // namespace

WindowedDataset WindowedDataset::subset(
    const std::vector<std::size_t>& indices) const {
    WindowedDataset out;
    out.window_samples = window_samples;
    out.channels = channels;
    out.num_classes = num_classes;
    out.window_seconds = window_seconds;
    out.overlap = overlap;
    out.subjects = subjects;
    const std::size_t stride =
        static_cast<std::size_t>(window_samples) * channels;
    for (std::size_t i : indices) {
        out.data.insert(out.data.end(), data.begin() + i * stride,
                        data.begin() + (i + 1) * stride);
        out.labels.push_back(labels[i]);
        out.subject_of.push_back(subject_of[i]);
    }
    return out;
}

WindowedDataset WindowedDataset::filter_subjects(
    const std::vector<int>& subject_ids, bool keep) const {
    std::set<int> ids(subject_ids.begin(), subject_ids.end());
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < size(); ++i)
        if (ids.count(subject_of[i]) == static_cast<std::size_t>(keep))
            indices.push_back(i);
    return subset(indices);
}

RawDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: empty file " + path);
    auto header = split_csv_line(line);
    if (header.size() < 3 || header.front() != "subject" ||
        header.back() != "label")
        throw DataError("csv: header must be subject,<channels...>,label in " +
                        path);
    const int channels = static_cast<int>(header.size()) - 2;

    RawDataset raw;
    raw.sampling_rate = schema.sampling_rate;
    raw.channels = channels;

    std::map<std::string, int> label_ids;
    if (schema.class_table) {
        raw.class_names = *schema.class_table;
        for (std::size_t i = 0; i < raw.class_names.size(); ++i)
            label_ids[raw.class_names[i]] = static_cast<int>(i);
    }

    std::map<std::string, std::size_t> stream_of_subject;
    std::size_t line_no = 1;
    bool any_rows = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("csv: expected " + std::to_string(header.size()) +
                            " columns, got " + std::to_string(fields.size()) +
                            " at line " + std::to_string(line_no));
        any_rows = true;
        const std::string& subject = fields[0];
        const std::string& label_str = fields.back();

        int label;
        auto it = label_ids.find(label_str);
        if (it != label_ids.end()) {
            label = it->second;
        } else if (schema.class_table) {
            throw DataError("csv: unknown label '" + label_str + "' at line " +
                            std::to_string(line_no));
        } else {
            label = static_cast<int>(raw.class_names.size());
            label_ids[label_str] = label;
            raw.class_names.push_back(label_str);
        }

        auto sit = stream_of_subject.find(subject);
        if (sit == stream_of_subject.end()) {
            sit = stream_of_subject.emplace(subject, raw.streams.size()).first;
            raw.streams.push_back({subject, {}, {}});
        }
        auto& stream = raw.streams[sit->second];
        for (int c = 0; c < channels; ++c)
            stream.samples.push_back(parse_channel_value(fields[1 + c], line_no));
        stream.labels.push_back(label);
    }
    if (!any_rows) throw DataError("csv: no data rows in " + path);
    return raw;
}

void write_csv(const RawDataset& raw, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw DataError("csv: cannot open " + tmp);
        out << "subject";
        for (int c = 0; c < raw.channels; ++c) out << ",ch_" << c;
        out << ",label\n";
        std::ostringstream os;
        os.precision(9);
        for (const auto& stream : raw.streams) {
            for (std::size_t t = 0; t < stream.length(); ++t) {
                out << stream.subject;
                for (int c = 0; c < raw.channels; ++c) {
                    os.str("");
                    os << stream.samples[t * raw.channels + c];
                    out << ',' << os.str();
                }
                out << ',' << raw.class_names[stream.labels[t]] << '\n';
            }
        }
        if (!out) throw DataError("csv: write failed for " + tmp);
    }
    std::rename(tmp.c_str(), path.c_str());
}

WindowedDataset segment(const RawDataset& raw, double window_seconds,
                        double overlap, WindowLabelMode mode) {
    if (overlap < 0.0 || overlap >= 1.0)
        throw ConfigError("overlap: must lie in [0,1), got " +
                          std::to_string(overlap));
    const double sw_real = window_seconds * raw.sampling_rate;
    if (sw_real < 1.0)
        throw ConfigError("window_seconds: window of " +
                          std::to_string(window_seconds) +
                          " s holds no samples at " +
                          std::to_string(raw.sampling_rate) + " Hz");
    const int s_w = static_cast<int>(std::llround(sw_real));
    const int stride =
        std::max<int>(1, static_cast<int>(std::llround(s_w * (1.0 - overlap))));

    WindowedDataset out;
    out.window_samples = s_w;
    out.channels = raw.channels;
    out.num_classes = raw.num_classes();
    out.window_seconds = window_seconds;
    out.overlap = overlap;

    std::map<std::string, int> subject_ids;
    for (const auto& stream : raw.streams) {
        auto it = subject_ids.find(stream.subject);
        if (it == subject_ids.end()) {
            it = subject_ids
                     .emplace(stream.subject,
                              static_cast<int>(out.subjects.size()))
                     .first;
            out.subjects.push_back(stream.subject);
        }
        const int subject = it->second;
        const std::size_t T = stream.length();
        if (T < static_cast<std::size_t>(s_w)) {
            std::fprintf(stderr,
                         "warning: stream of subject %s has %zu samples, "
                         "shorter than one window (%d); skipped\n",
                         stream.subject.c_str(), T, s_w);
            continue;
        }
        const std::size_t count = (T - s_w) / stride + 1;
        for (std::size_t w = 0; w < count; ++w) {
            const std::size_t start = w * stride;
            const double* src = stream.samples.data() + start * raw.channels;
            out.data.insert(out.data.end(), src,
                            src + static_cast<std::size_t>(s_w) * raw.channels);
            int label;
            if (mode == WindowLabelMode::kLastSample) {
                label = stream.labels[start + s_w - 1];
            } else {
                std::vector<int> counts(raw.num_classes(), 0);
                for (int i = 0; i < s_w; ++i) counts[stream.labels[start + i]]++;
                label = static_cast<int>(std::distance(
                    counts.begin(),
                    std::max_element(counts.begin(), counts.end())));
            }
            out.labels.push_back(label);
            out.subject_of.push_back(subject);
        }
    }
    return out;
}

RawDataset normalize(const RawDataset& raw,
                     const std::vector<std::string>& stats_subjects,
                     NormScheme scheme) {
    if (scheme == NormScheme::kNone) return raw;
    if (stats_subjects.empty())
        throw ConfigError("normalize: statistics subject set is empty");
    std::set<std::string> wanted(stats_subjects.begin(), stats_subjects.end());

    const int C = raw.channels;
    std::vector<double> mean(C, 0.0), var(C, 0.0);
    std::vector<double> lo(C, std::numeric_limits<double>::infinity());
    std::vector<double> hi(C, -std::numeric_limits<double>::infinity());
    std::size_t n = 0;
    for (const auto& stream : raw.streams) {
        if (!wanted.count(stream.subject)) continue;
        for (std::size_t t = 0; t < stream.length(); ++t)
            for (int c = 0; c < C; ++c) {
                double v = stream.samples[t * C + c];
                mean[c] += v;
                lo[c] = std::min(lo[c], v);
                hi[c] = std::max(hi[c], v);
            }
        n += stream.length();
    }
    if (n == 0)
        throw ConfigError("normalize: statistics subjects match no stream");
    for (int c = 0; c < C; ++c) mean[c] /= static_cast<double>(n);
    for (const auto& stream : raw.streams) {
        if (!wanted.count(stream.subject)) continue;
        for (std::size_t t = 0; t < stream.length(); ++t)
            for (int c = 0; c < C; ++c) {
                double d = stream.samples[t * C + c] - mean[c];
                var[c] += d * d;
            }
    }

    constexpr double kStdFloor = 1e-8;
    RawDataset out = raw;
    for (auto& stream : out.streams) {
        for (std::size_t t = 0; t < stream.length(); ++t)
            for (int c = 0; c < C; ++c) {
                double& v = stream.samples[t * C + c];
                if (scheme == NormScheme::kZScore) {
                    double sd = std::sqrt(var[c] / static_cast<double>(n));
                    v = (v - mean[c]) / std::max(sd, kStdFloor);
                } else {
                    double span = std::max(hi[c] - lo[c], kStdFloor);
                    v = (v - lo[c]) / span;
                }
            }
    }
    return out;
}

RawDataset synth_generate(const SynthConfig& cfg) {
    if (cfg.num_subjects < 1 || cfg.num_classes < 1 || cfg.channels < 1 ||
        cfg.sampling_rate <= 0.0 || cfg.duration_seconds <= 0.0)
        throw ConfigError("synth: all generator parameters must be positive");

    RawDataset raw;
    raw.sampling_rate = cfg.sampling_rate;
    raw.channels = cfg.channels;
    for (int c = 0; c < cfg.num_classes; ++c)
        raw.class_names.push_back("activity_" + std::to_string(c));

    std::mt19937_64 rng(cfg.seed);
    const std::size_t total =
        static_cast<std::size_t>(cfg.duration_seconds * cfg.sampling_rate);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.15);

    for (int s = 0; s < cfg.num_subjects; ++s) {
        RawDataset::Stream stream;
        stream.subject = "subject_" + std::to_string(s);
        stream.samples.reserve(total * cfg.channels);
        stream.labels.reserve(total);

        const double subject_gain = 0.8 + 0.4 * uni(rng);
        std::vector<double> channel_phase(cfg.channels);
        for (auto& p : channel_phase) p = 2.0 * M_PI * uni(rng);

        std::size_t t = 0;
        while (t < total) {
            const int cls = static_cast<int>(uni(rng) * cfg.num_classes) %
                            cfg.num_classes;
            // Activity segments between 2 and 5 seconds long.
            std::size_t seg = static_cast<std::size_t>(
                (2.0 + 3.0 * uni(rng)) * cfg.sampling_rate);
            seg = std::min(seg, total - t);
            const double segment_phase = 2.0 * M_PI * uni(rng);
            const double freq = 1.0 + 1.5 * cls;         // distinct frequency
            const double amp = (1.0 + 0.5 * cls) * subject_gain;
            for (std::size_t i = 0; i < seg; ++i, ++t) {
                const double time = static_cast<double>(t) / cfg.sampling_rate;
                for (int c = 0; c < cfg.channels; ++c) {
                    const double phase = channel_phase[c] + segment_phase +
                                         0.5 * M_PI * c;
                    stream.samples.push_back(
                        amp * std::sin(2.0 * M_PI * freq * time + phase) +
                        noise(rng));
                }
                stream.labels.push_back(cls);
            }
        }
        raw.streams.push_back(std::move(stream));
    }
    return raw;
}

}  // namespace har

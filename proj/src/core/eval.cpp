#include "core/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace har {

std::vector<Fold> loso_folds(const WindowedDataset& dataset) {
    std::set<int> present(dataset.subject_of.begin(), dataset.subject_of.end());
    if (present.size() < 2)
        throw DataError(
            "loso: needs at least 2 subjects, got " +
            std::to_string(present.size()) +
            "; use a plain holdout split for single-subject data");
    std::vector<int> subjects(present.begin(), present.end());
    std::vector<Fold> folds;
    for (int val : subjects) {
        Fold fold;
        fold.validation_subject = val;
        for (int s : subjects)
            if (s != val) fold.train_subjects.push_back(s);
        folds.push_back(std::move(fold));
    }
    return folds;
}

std::vector<std::pair<std::string, double>> metric_values(
    const MetricsRecord& rec) {
    return {{"accuracy", rec.accuracy},
            {"macro_precision", rec.macro_precision},
            {"macro_recall", rec.macro_recall},
            {"macro_f1", rec.macro_f1},
            {"weighted_precision", rec.weighted_precision},
            {"weighted_recall", rec.weighted_recall},
            {"weighted_f1", rec.weighted_f1}};
}

std::vector<VariantAggregate> compute_aggregates(
    const EvaluationReport& report) {
    // variant key -> fold -> metric name -> per-seed values
    std::map<std::pair<int, int>, std::map<int, std::map<std::string, std::vector<double>>>>
        groups;
    std::map<std::pair<int, int>, std::pair<double, std::size_t>> epoch_time;
    std::map<std::pair<int, int>, std::int64_t> lstm_params;
    for (const auto& cell : report.cells) {
        auto key = std::make_pair(cell.lstm_layers, cell.hidden_units);
        for (const auto& [name, value] : metric_values(cell.validation))
            groups[key][cell.fold][name].push_back(value);
        auto& et = epoch_time[key];
        et.first += cell.mean_epoch_seconds;
        et.second += 1;
        lstm_params[key] = cell.lstm_param_total;
    }

    std::vector<VariantAggregate> aggregates;
    for (const auto& [key, folds] : groups) {
        VariantAggregate agg;
        agg.lstm_layers = key.first;
        agg.hidden_units = key.second;
        agg.lstm_param_total = lstm_params[key];
        agg.mean_epoch_seconds = epoch_time[key].first / epoch_time[key].second;

        std::map<std::string, std::pair<double, double>> sums;  // mean, std
        for (const auto& [fold, metrics] : folds) {
            (void)fold;
            for (const auto& [name, values] : metrics) {
                double mean = 0.0;
                for (double v : values) mean += v;
                mean /= static_cast<double>(values.size());
                double std_dev = 0.0;
                if (values.size() > 1) {
                    double ss = 0.0;
                    for (double v : values) ss += (v - mean) * (v - mean);
                    std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
                }
                sums[name].first += mean;
                sums[name].second += std_dev;
            }
        }
        const double nfolds = static_cast<double>(folds.size());
        for (const auto& [name, s] : sums)
            agg.metrics[name] = {s.first / nfolds, s.second / nfolds};
        aggregates.push_back(std::move(agg));
    }
    return aggregates;
}

namespace {

nlohmann::json metrics_to_json(const MetricsRecord& rec) {
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

}  // namespace

nlohmann::json report_to_json(const EvaluationReport& report) {
    nlohmann::json j;
    j["subjects"] = report.subjects;
    j["seeds"] = report.seeds;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : report.cells) {
        nlohmann::json c;
        c["lstm_layers"] = cell.lstm_layers;
        c["hidden_units"] = cell.hidden_units;
        c["seed"] = cell.seed;
        c["fold"] = cell.fold;
        c["validation_subject"] = cell.validation_subject;
        c["epochs_run"] = cell.epochs_run;
        c["final_train_loss"] = cell.final_train_loss;
        c["train"] = metrics_to_json(cell.train_final);
        c["validation"] = metrics_to_json(cell.validation);
        c["lstm_param_total"] = cell.lstm_param_total;
        c["param_total"] = cell.param_total;
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    nlohmann::json aggs = nlohmann::json::array();
    for (const auto& agg : report.aggregates) {
        nlohmann::json a;
        a["lstm_layers"] = agg.lstm_layers;
        a["hidden_units"] = agg.hidden_units;
        a["lstm_param_total"] = agg.lstm_param_total;
        for (const auto& [name, summary] : agg.metrics) {
            a["metrics"][name]["mean"] = summary.mean;
            a["metrics"][name]["std_over_seeds"] = summary.std_over_seeds;
        }
        aggs.push_back(std::move(a));
    }
    j["aggregates"] = std::move(aggs);
    return j;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw DataError("cannot open " + tmp);
        out << content;
        if (!out) throw DataError("write failed for " + tmp);
    }
    std::rename(tmp.c_str(), path.c_str());
}

void write_report_json(const EvaluationReport& report,
                       const nlohmann::json& config_snapshot,
                       const std::string& path) {
    nlohmann::json j = report_to_json(report);
    j["config"] = config_snapshot;
    atomic_write_text(path, j.dump(2) + "\n");
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

void write_cells_csv(const EvaluationReport& report, const std::string& path) {
    std::ostringstream os;
    os << "lstm_layers,hidden_units,seed,fold,validation_subject,epochs_run,"
          "final_train_loss,accuracy,macro_precision,macro_recall,macro_f1,"
          "weighted_precision,weighted_recall,weighted_f1,lstm_param_total,"
          "param_total\n";
    for (const auto& cell : report.cells) {
        os << cell.lstm_layers << ',' << cell.hidden_units << ',' << cell.seed
           << ',' << cell.fold << ',' << cell.validation_subject << ','
           << cell.epochs_run << ',' << fmt(cell.final_train_loss);
        for (const auto& [name, value] : metric_values(cell.validation)) {
            (void)name;
            os << ',' << fmt(value);
        }
        os << ',' << cell.lstm_param_total << ',' << cell.param_total << '\n';
    }
    atomic_write_text(path, os.str());
}

void write_timing_csv(const EvaluationReport& report, const std::string& path) {
    std::ostringstream os;
    os << "lstm_layers,hidden_units,seed,fold,mean_epoch_seconds,total_seconds\n";
    for (const auto& cell : report.cells)
        os << cell.lstm_layers << ',' << cell.hidden_units << ',' << cell.seed
           << ',' << cell.fold << ',' << fmt(cell.mean_epoch_seconds) << ','
           << fmt(cell.total_seconds) << '\n';
    atomic_write_text(path, os.str());
}

std::string summary_text(const EvaluationReport& report) {
    std::ostringstream os;
    os << "1-layer vs 2-layer LSTM comparison (validation macro F1, LSTM "
          "parameters, epoch time)\n\n";
    os << "hidden |  F1(1L)  |  F1(2L)  | F1 delta | params(1L) | params(2L) "
          "| param delta | time ratio 1L/2L\n";

    std::map<int, const VariantAggregate*> one, two;
    for (const auto& agg : report.aggregates)
        (agg.lstm_layers == 1 ? one : two)[agg.hidden_units] = &agg;
    for (const auto& [hidden, a1] : one) {
        auto it = two.find(hidden);
        if (it == two.end()) continue;
        const VariantAggregate* a2 = it->second;
        const double f1_1 = a1->metrics.at("macro_f1").mean;
        const double f1_2 = a2->metrics.at("macro_f1").mean;
        os << hidden << " | " << fmt(f1_1) << " | " << fmt(f1_2) << " | "
           << fmt(f1_1 - f1_2) << " | " << a1->lstm_param_total << " | "
           << a2->lstm_param_total << " | "
           << (a2->lstm_param_total - a1->lstm_param_total) << " | "
           << fmt(a1->mean_epoch_seconds / a2->mean_epoch_seconds) << '\n';
    }
    return os.str();
}

}  // namespace har

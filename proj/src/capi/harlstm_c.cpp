#include "harlstm/harlstm.h"

#include <fstream>
#include <string>

#include <json.hpp>

#include "core/blas.hpp"
#include "core/cost.hpp"
#include "core/errors.hpp"
#include "core/experiment.hpp"

// Opaque experiment handle: raw JSON layers (defaults < file < overrides)
// resolved into an ExperimentConfig at run time.
struct har_experiment_s {
    nlohmann::json file_config = nlohmann::json::object();
    nlohmann::json overrides = nlohmann::json::object();
    std::string last_error;
    std::string config_buffer;

    har::ExperimentConfig resolve() const {
        nlohmann::json merged = file_config;
        merged.merge_patch(overrides);
        return har::ExperimentConfig::from_json(merged);
    }
};

namespace {

har_status run_guarded(har_experiment* exp, void (*fn)(const har::ExperimentConfig&)) {
    if (!exp) return HAR_ERROR_INTERNAL;
    exp->last_error.clear();
    try {
        har::use_single_threaded_blas();
        fn(exp->resolve());
        return HAR_OK;
    } catch (const har::ConfigError& e) {
        exp->last_error = e.what();
        return HAR_ERROR_CONFIG;
    } catch (const har::DivergenceError& e) {
        exp->last_error = e.what();
        return HAR_ERROR_DIVERGENCE;
    } catch (const har::DataError& e) {
        exp->last_error = e.what();
        return HAR_ERROR_DATA;
    } catch (const std::exception& e) {
        exp->last_error = e.what();
        return HAR_ERROR_INTERNAL;
    }
}

}  // namespace

extern "C" {

const char* har_version(void) { return "1.0.0"; }

har_experiment* har_experiment_create(void) { return new har_experiment_s(); }

void har_experiment_destroy(har_experiment* exp) { delete exp; }

har_status har_experiment_load_config(har_experiment* exp,
                                      const char* json_path) {
    if (!exp || !json_path) return HAR_ERROR_INTERNAL;
    exp->last_error.clear();
    std::ifstream in(json_path);
    if (!in) {
        exp->last_error = std::string("cannot open config file ") + json_path;
        return HAR_ERROR_CONFIG;
    }
    nlohmann::json parsed = nlohmann::json::parse(in, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        exp->last_error =
            std::string("config file is not a JSON object: ") + json_path;
        return HAR_ERROR_CONFIG;
    }
    exp->file_config = std::move(parsed);
    return HAR_OK;
}

har_status har_experiment_set(har_experiment* exp, const char* key,
                              const char* value) {
    if (!exp || !key || !value) return HAR_ERROR_INTERNAL;
    exp->last_error.clear();
    try {
        har::set_dotted(exp->overrides, key, value);
        return HAR_OK;
    } catch (const std::exception& e) {
        exp->last_error = e.what();
        return HAR_ERROR_CONFIG;
    }
}

const char* har_experiment_config_json(har_experiment* exp) {
    if (!exp) return nullptr;
    exp->last_error.clear();
    try {
        exp->config_buffer = exp->resolve().resolved().dump(2);
        return exp->config_buffer.c_str();
    } catch (const std::exception& e) {
        exp->last_error = e.what();
        return nullptr;
    }
}

har_status har_experiment_run_synth(har_experiment* exp) {
    return run_guarded(exp, har::run_synth);
}

har_status har_experiment_run_train(har_experiment* exp) {
    return run_guarded(exp, har::run_train);
}

har_status har_experiment_run_loso_grid(har_experiment* exp) {
    return run_guarded(exp, har::run_loso_grid);
}

har_status har_experiment_run_bench(har_experiment* exp) {
    return run_guarded(exp, har::run_bench);
}

const char* har_experiment_last_error(const har_experiment* exp) {
    return exp ? exp->last_error.c_str() : "";
}

int64_t har_lstm_param_count(int64_t input_extent, int64_t hidden_units,
                             int layers) {
    if (input_extent < 1 || hidden_units < 1 || (layers != 1 && layers != 2))
        return -1;
    return har::LstmCostModel(input_extent, hidden_units).params(layers);
}

har_status har_analyze_costs(const int64_t* s_values, int num_s,
                             const int64_t* h_values, int num_h,
                             const char* out_csv, double* mean_reduction) {
    if (!s_values || !h_values || num_s < 1 || num_h < 1)
        return HAR_ERROR_CONFIG;
    try {
        std::vector<std::int64_t> s(s_values, s_values + num_s);
        std::vector<std::int64_t> h(h_values, h_values + num_h);
        double mean = har::run_analyze(s, h, out_csv ? out_csv : "");
        if (mean_reduction) *mean_reduction = mean;
        return HAR_OK;
    } catch (const har::ConfigError&) {
        return HAR_ERROR_CONFIG;
    } catch (const std::exception&) {
        return HAR_ERROR_INTERNAL;
    }
}

}  // extern "C"

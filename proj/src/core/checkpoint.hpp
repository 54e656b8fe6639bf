#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/model.hpp"

namespace har {

// Checkpoint file layout (version 1):
//   8-byte magic "HARCKPT1"
//   uint64 little-endian JSON header length
//   JSON header: version, dtype, gate order, feature layout, model config,
//                tensor table (name, shape, element count, byte offset)
//   raw tensor data, little-endian, in table order
inline constexpr char kCheckpointMagic[8] = {'H', 'A', 'R', 'C',
                                             'K', 'P', 'T', '1'};

namespace detail {
template <typename Real>
const char* dtype_name();
template <>
inline const char* dtype_name<float>() { return "float32"; }
template <>
inline const char* dtype_name<double>() { return "float64"; }
}  // namespace detail

inline nlohmann::json model_config_to_json(const ModelConfig& cfg) {
    return nlohmann::json{{"num_conv_layers", cfg.num_conv_layers},
                          {"num_filters", cfg.num_filters},
                          {"kernel_len", cfg.kernel_len},
                          {"lstm_layers", cfg.lstm_layers},
                          {"hidden_units", cfg.hidden_units},
                          {"dropout_p", cfg.dropout_p},
                          {"num_classes", cfg.num_classes},
                          {"channels", cfg.channels},
                          {"window_samples", cfg.window_samples}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.num_conv_layers = j.at("num_conv_layers").get<int>();
    cfg.num_filters = j.at("num_filters").get<int>();
    cfg.kernel_len = j.at("kernel_len").get<int>();
    cfg.lstm_layers = j.at("lstm_layers").get<int>();
    cfg.hidden_units = j.at("hidden_units").get<int>();
    cfg.dropout_p = j.at("dropout_p").get<double>();
    cfg.num_classes = j.at("num_classes").get<int>();
    cfg.channels = j.at("channels").get<int>();
    cfg.window_samples = j.at("window_samples").get<int>();
    return cfg;
}

template <typename Real>
void save_checkpoint(DeepConvLstmModel<Real>& model, const std::string& path) {
    auto params = model.named_parameters();
    nlohmann::json header;
    header["version"] = 1;
    header["dtype"] = detail::dtype_name<Real>();
    header["gate_order"] = "ifgo";
    header["feature_layout"] = "time-major; per step features are (filter,channel) flattened";
    header["model"] = model_config_to_json(model.config());
    nlohmann::json table = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& p : params) {
        nlohmann::json entry;
        entry["name"] = p.name;
        entry["shape"] = p.tensor.shape();
        entry["count"] = p.tensor.size();
        entry["offset"] = offset;
        table.push_back(entry);
        offset += p.tensor.size() * sizeof(Real);
    }
    header["tensors"] = table;
    const std::string header_str = header.dump();

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("checkpoint: cannot open " + tmp);
        out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
        std::uint64_t len = header_str.size();
        out.write(reinterpret_cast<const char*>(&len), sizeof(len));
        out.write(header_str.data(), static_cast<std::streamsize>(len));
        for (const auto& p : params)
            out.write(reinterpret_cast<const char*>(p.tensor.data()),
                      static_cast<std::streamsize>(p.tensor.size() * sizeof(Real)));
        if (!out) throw DataError("checkpoint: write failed for " + tmp);
    }
    std::rename(tmp.c_str(), path.c_str());
}

template <typename Real>
DeepConvLstmModel<Real> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw DataError("checkpoint: bad magic in " + path);
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string header_str(len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("checkpoint: truncated header in " + path);
    nlohmann::json header = nlohmann::json::parse(header_str);
    if (header.at("version").get<int>() != 1)
        throw DataError("checkpoint: unsupported version in " + path);
    if (header.at("dtype").get<std::string>() != detail::dtype_name<Real>())
        throw DataError("checkpoint: dtype mismatch in " + path + " (file has " +
                        header.at("dtype").get<std::string>() + ")");

    ModelConfig cfg = model_config_from_json(header.at("model"));
    auto model = DeepConvLstmModel<Real>::build(cfg, 0);
    auto params = model.named_parameters();
    const auto& table = header.at("tensors");
    if (table.size() != params.size())
        throw DataError("checkpoint: tensor table size mismatch in " + path);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& entry = table[i];
        if (entry.at("name").get<std::string>() != params[i].name ||
            entry.at("count").get<std::size_t>() != params[i].tensor.size())
            throw DataError("checkpoint: tensor " + params[i].name +
                            " does not match file layout in " + path);
        in.read(reinterpret_cast<char*>(params[i].tensor.data()),
                static_cast<std::streamsize>(params[i].tensor.size() * sizeof(Real)));
    }
    if (!in) throw DataError("checkpoint: truncated tensor data in " + path);
    return model;
}

}  // namespace har

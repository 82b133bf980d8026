// JSON ingestion for generic interconnection models.
//
// Schema:
//   {
//     "partition": [n_1, ..., n_N],
//     "vertices":  [ { "blocks": { "i,j": [row-major entries] } }, ... ]
//   }
// Block keys are 1-based "row,col" pairs; omitted blocks are zero.
#pragma once

#include <fstream>
#include <json.hpp>

#include "twocon/gains.hpp"

namespace twocon {

inline InterconnectionModel model_from_json(const nlohmann::json& j) {
    if (!j.contains("partition") || !j.at("partition").is_array() ||
        j.at("partition").empty())
        throw std::runtime_error("model: 'partition' must be a non-empty array");
    std::vector<Index> sizes;
    for (const auto& s : j.at("partition")) {
        if (!s.is_number_integer() || s.get<Index>() < 1)
            throw std::runtime_error("model: partition entries must be positive integers");
        sizes.push_back(s.get<Index>());
    }
    const BlockPartition part(sizes);

    if (!j.contains("vertices") || !j.at("vertices").is_array() || j.at("vertices").empty())
        throw std::runtime_error("model: 'vertices' must be a non-empty array");

    InterconnectionModel model;
    model.partition = part;
    for (const auto& vj : j.at("vertices")) {
        if (!vj.contains("blocks") || !vj.at("blocks").is_object())
            throw std::runtime_error("model: each vertex needs a 'blocks' object");
        Matrix full = Matrix::Zero(part.total(), part.total());
        for (const auto& [key, entries] : vj.at("blocks").items()) {
            const auto comma = key.find(',');
            Index bi = 0, bj = 0;
            try {
                if (comma == std::string::npos) throw std::invalid_argument(key);
                bi = std::stol(key.substr(0, comma));
                bj = std::stol(key.substr(comma + 1));
            } catch (const std::exception&) {
                throw std::runtime_error("model: block key '" + key +
                                         "' is not of the form 'i,j'");
            }
            if (bi < 1 || bi > part.blocks() || bj < 1 || bj > part.blocks())
                throw std::runtime_error("model: block key '" + key +
                                         "' outside the partition (1-based)");
            const Index rows = part.sizes[bi - 1], cols = part.sizes[bj - 1];
            if (!entries.is_array() ||
                static_cast<Index>(entries.size()) != rows * cols)
                throw std::runtime_error("model: block '" + key + "' must be a flat " +
                                         "row-major array of " +
                                         std::to_string(rows * cols) + " numbers");
            for (Index r = 0; r < rows; ++r)
                for (Index c = 0; c < cols; ++c)
                    full(part.offsets[bi - 1] + r, part.offsets[bj - 1] + c) =
                        entries.at(static_cast<std::size_t>(r * cols + c)).get<double>();
        }
        model.vertices.push_back(std::move(full));
    }
    model.validate();
    return model;
}

inline InterconnectionModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace twocon

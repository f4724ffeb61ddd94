#pragma once

#include <filesystem>
#include <span>

#include <nlohmann/json.hpp>

#include "emoface/nn/tensor.hpp"

namespace emoface::nn {

inline constexpr int kCheckpointVersion = 1;

/// {"shape": [rows, cols], "values": [...row-major...]}
nlohmann::json matrix_to_json(const Matrix& m);
/// Throws DimensionError if the value count disagrees with the shape.
Matrix matrix_from_json(const nlohmann::json& j);

/// Array of named tensors.
nlohmann::json parameters_to_json(std::span<Parameter* const> params);
/// Loads values by name; every parameter must be present with the same shape
/// (DimensionError otherwise). Extra tensors in the manifest are an error too.
void parameters_from_json(const nlohmann::json& tensors, std::span<Parameter* const> params);

/// Checkpoint file: {"format": "emoface-checkpoint", "version": 1,
/// "kind": ..., "model": {...}, "parameters": [...]} plus optional extras.
/// Doubles are written with round-trip precision, so equal parameters give
/// byte-identical files.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

nlohmann::json make_checkpoint(std::string_view kind, const nlohmann::json& model_config,
                               std::span<Parameter* const> params);
/// Validates format/version/kind and returns the manifest.
nlohmann::json open_checkpoint(const std::filesystem::path& path, std::string_view kind);

}  // namespace emoface::nn

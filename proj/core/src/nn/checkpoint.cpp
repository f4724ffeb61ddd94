#include "emoface/nn/checkpoint.hpp"

#include <map>
#include <set>

#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"

namespace emoface::nn {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json values = nlohmann::json::array();
  for (Index i = 0; i < m.size(); ++i) values.push_back(m.data()[i]);
  return {{"shape", {m.rows(), m.cols()}}, {"values", std::move(values)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto& shape = j.at("shape");
  const auto& values = j.at("values");
  if (!shape.is_array() || shape.size() != 2) throw DimensionError("tensor shape must be 2-D");
  const Index rows = shape[0].get<Index>(), cols = shape[1].get<Index>();
  if (rows < 0 || cols < 0 || static_cast<Index>(values.size()) != rows * cols)
    throw DimensionError("tensor value count does not match its shape");
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = values[static_cast<std::size_t>(i)].get<double>();
  return m;
}

nlohmann::json parameters_to_json(std::span<Parameter* const> params) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto* p : params) {
    auto t = matrix_to_json(p->value);
    t["name"] = p->name;
    out.push_back(std::move(t));
  }
  return out;
}

void parameters_from_json(const nlohmann::json& tensors, std::span<Parameter* const> params) {
  std::set<std::string> expected;
  for (const auto* p : params) expected.insert(p->name);
  std::map<std::string, const nlohmann::json*> by_name;
  for (const auto& t : tensors) {
    const auto name = t.at("name").get<std::string>();
    if (!expected.count(name)) throw DimensionError("unexpected tensor '" + name + "' in checkpoint");
    by_name[name] = &t;
  }
  for (auto* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw DimensionError("checkpoint is missing tensor '" + p->name + "'");
    Matrix m = matrix_from_json(*it->second);
    if (m.rows() != p->value.rows() || m.cols() != p->value.cols())
      throw DimensionError("shape mismatch for tensor '" + p->name + "'");
    p->value = std::move(m);
    p->zero_grad();
    ++p->version;
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file(path, j.dump(1) + "\n");
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

nlohmann::json make_checkpoint(std::string_view kind, const nlohmann::json& model_config,
                               std::span<Parameter* const> params) {
  return {{"format", "emoface-checkpoint"},
          {"version", kCheckpointVersion},
          {"kind", std::string(kind)},
          {"model", model_config},
          {"parameters", parameters_to_json(params)}};
}

nlohmann::json open_checkpoint(const std::filesystem::path& path, std::string_view kind) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint not found: " + path.string());
  auto j = read_json_file(path);
  if (j.value("format", "") != "emoface-checkpoint")
    throw IoError(path.string() + ": not an emoface checkpoint");
  if (j.value("version", 0) != kCheckpointVersion)
    throw IoError(path.string() + ": unsupported checkpoint version");
  if (j.value("kind", "") != kind)
    throw IoError(path.string() + ": expected a '" + std::string(kind) + "' checkpoint, got '" +
                  j.value("kind", "") + "'");
  return j;
}

}  // namespace emoface::nn

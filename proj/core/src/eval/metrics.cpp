#include "emoface/eval/metrics.hpp"

#include <map>

#include "emoface/common/error.hpp"
#include "emoface/nn/losses.hpp"
#include "emoface/tead/augment.hpp"

namespace emoface::eval {

using nn::Index;
using nn::Matrix;

double reconstruction_mse(const align::ExpCLIPModel& model, const Matrix& weights) {
  if (weights.rows() == 0) throw InvalidArgument("reconstruction MSE of an empty set");
  return nn::mse(model.decode(model.encode(weights)), weights).value;
}

double reconstruction_mse(const align::ExpCLIPModel& model, const tead::TEADStore& store) {
  std::vector<facs::BlendshapeWeights> rows;
  for (const auto& q : store.records()) rows.push_back(q.blendshapes);
  return reconstruction_mse(model, align::to_matrix(rows));
}

double retrieval_topk(const Matrix& queries, const Matrix& candidates, std::size_t k,
                      const std::vector<std::size_t>& truth) {
  if (queries.rows() == 0 || candidates.rows() == 0) throw InvalidArgument("retrieval needs queries and candidates");
  if (queries.cols() != candidates.cols()) throw DimensionError("query and candidate widths differ");
  if (k == 0) throw InvalidArgument("k must be positive");
  if (!truth.empty() && truth.size() != static_cast<std::size_t>(queries.rows()))
    throw DimensionError("one truth index per query is required");
  if (truth.empty() && candidates.rows() < queries.rows())
    throw DimensionError("without truth indices every query needs its own candidate");

  Matrix qn = queries.rowwise().normalized();
  Matrix cn = candidates.rowwise().normalized();
  if (!qn.allFinite() || !cn.allFinite()) throw NumericError("retrieval embedding has zero norm");
  const Matrix sim = qn * cn.transpose();
  std::size_t hits = 0;
  for (Index i = 0; i < sim.rows(); ++i) {
    const auto t = truth.empty() ? static_cast<Index>(i) : static_cast<Index>(truth[static_cast<std::size_t>(i)]);
    if (t >= sim.cols()) throw DimensionError("truth index out of range");
    std::size_t better = 0;
    for (Index j = 0; j < sim.cols(); ++j)
      if (sim(i, j) > sim(i, t)) ++better;
    if (better < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(sim.rows());
}

Smoothness smoothness(const std::vector<facs::BlendshapeWeights>& seq) {
  if (seq.size() < 2) throw InvalidArgument("smoothness needs at least two frames");
  Smoothness s;
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    double d = 0.0;
    for (std::size_t c = 0; c < facs::kNumBlendshapes; ++c)
      d = std::max(d, std::abs(seq[t + 1][c] - seq[t][c]));
    s.max_delta = std::max(s.max_delta, d);
    s.mean_delta += d;
  }
  s.mean_delta /= static_cast<double>(seq.size() - 1);
  return s;
}

GroupCentroids group_centroids(const tead::TEADStore& store,
                               const std::function<std::optional<std::size_t>(std::string_view)>& group_of) {
  std::map<std::size_t, std::pair<Eigen::RowVectorXd, std::size_t>> acc;
  for (const auto& q : store.records()) {
    const auto g = group_of(q.id);
    if (!g) continue;
    auto& [sum, count] = acc.try_emplace(*g, Eigen::RowVectorXd::Zero(facs::kNumBlendshapes), 0).first->second;
    sum += Eigen::Map<const Eigen::RowVectorXd>(q.blendshapes.data(), facs::kNumBlendshapes);
    ++count;
  }
  GroupCentroids out;
  for (const auto& [g, entry] : acc) {
    out.groups.push_back(g);
    const Eigen::RowVectorXd mean = entry.first / static_cast<double>(entry.second);
    out.centroids.push_back(facs::BlendshapeWeights::clamped({mean.data(), facs::kNumBlendshapes}));
  }
  return out;
}

double tag_retrieval_accuracy(const align::ExpCLIPModel& model, const tead::TEADStore& train,
                              const tead::TEADStore& test,
                              const std::function<std::optional<std::size_t>(std::string_view)>& group_of,
                              std::size_t k) {
  std::map<std::size_t, std::pair<Eigen::RowVectorXd, std::size_t>> acc;
  for (const auto& q : train.records()) {
    const auto g = group_of(q.id);
    if (!g) continue;
    auto& [sum, count] = acc.try_emplace(*g, Eigen::RowVectorXd::Zero(model.config().embed_dim), 0).first->second;
    sum += model.encode_expression(q.blendshapes);
    ++count;
  }
  if (acc.empty()) throw InvalidArgument("no training record belongs to a group");
  std::map<std::size_t, std::size_t> column;
  Matrix candidates(static_cast<Index>(acc.size()), model.config().embed_dim);
  for (const auto& [g, entry] : acc) {
    const std::size_t idx = column.size();
    column[g] = idx;
    candidates.row(static_cast<Index>(idx)) = entry.first / static_cast<double>(entry.second);
  }
  std::vector<std::string> texts;
  std::vector<std::size_t> truth;
  for (const auto& q : test.records()) {
    const auto g = group_of(q.id);
    if (!g || !column.count(*g)) continue;
    texts.push_back(tead::tags_text(q));
    truth.push_back(column[*g]);
  }
  if (texts.empty()) throw InvalidArgument("no test record belongs to a known group");
  return retrieval_topk(model.project_text(model.featurize_texts(texts)), candidates, k, truth);
}

double style_consistency(const animgen::GeneratorModel& generator, const align::ExpCLIPModel& expclip,
                         const std::vector<facs::BlendshapeWeights>& prompts,
                         const std::vector<animgen::SpeechFeatureSequence>& speech) {
  if (prompts.empty() || speech.empty()) throw InvalidArgument("style consistency needs prompts and speech");
  double sum = 0.0;
  for (const auto& p : prompts) {
    const align::StyleEmbedding target = expclip.encode_expression(p);
    for (const auto& s : speech) {
      const Matrix mean = generator.generate(s, target).to_matrix().colwise().mean();
      sum += nn::cosine_similarity(expclip.encode(mean), Matrix(target));
    }
  }
  return sum / static_cast<double>(prompts.size() * speech.size());
}

}  // namespace emoface::eval

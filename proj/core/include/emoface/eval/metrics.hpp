#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "emoface/align/model.hpp"
#include "emoface/animgen/generator.hpp"
#include "emoface/tead/store.hpp"

namespace emoface::eval {

/// Mean squared error of D(E(b)) against b over all entries of all rows.
/// Throws InvalidArgument for an empty set.
double reconstruction_mse(const align::ExpCLIPModel& model, const nn::Matrix& weights);
double reconstruction_mse(const align::ExpCLIPModel& model, const tead::TEADStore& store);

/// Fraction of queries whose true candidate (truth[i], or i when truth is
/// empty) is among the k most cosine-similar candidates. A candidate tied
/// with the true one does not push it down: rank is the number of candidates
/// with strictly greater similarity.
double retrieval_topk(const nn::Matrix& queries, const nn::Matrix& candidates, std::size_t k,
                      const std::vector<std::size_t>& truth = {});

struct Smoothness {
  double max_delta = 0.0;
  double mean_delta = 0.0;
};

/// L-infinity norms of consecutive frame differences: their max and mean.
/// Throws InvalidArgument for fewer than two frames.
Smoothness smoothness(const std::vector<facs::BlendshapeWeights>& sequence);

/// Per-group mean blendshape weights of the records whose id maps to a
/// group. Groups without records are left out.
struct GroupCentroids {
  std::vector<std::size_t> groups;
  std::vector<facs::BlendshapeWeights> centroids;
};
GroupCentroids group_centroids(const tead::TEADStore& store,
                               const std::function<std::optional<std::size_t>(std::string_view)>& group_of);

/// Text-to-expression retrieval: every test record's tag text is encoded and
/// ranked against the mean expression embedding of each training group.
/// Returns the top-k accuracy.
double tag_retrieval_accuracy(const align::ExpCLIPModel& model, const tead::TEADStore& train,
                              const tead::TEADStore& test,
                              const std::function<std::optional<std::size_t>(std::string_view)>& group_of,
                              std::size_t k = 1);

/// Style consistency of a generator: for each prompt and speech sequence,
/// cosine between E(mean over frames of the generated clip) and the prompt's
/// expression embedding, averaged. Mean pooling keeps the measurement
/// independent of the generator's own pooling module.
double style_consistency(const animgen::GeneratorModel& generator, const align::ExpCLIPModel& expclip,
                         const std::vector<facs::BlendshapeWeights>& prompts,
                         const std::vector<animgen::SpeechFeatureSequence>& speech);

}  // namespace emoface::eval

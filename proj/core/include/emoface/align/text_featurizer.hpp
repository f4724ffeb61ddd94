#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace emoface::align {

/// Frozen text features: hashed word unigram and bigram counts.
///
/// Text is lowercased, every character that is not an ASCII letter or digit
/// becomes a separator (apostrophes are deleted, so "can't" == "cant"), and
/// the remaining words form the unigrams and adjacent bigrams. Each n-gram
/// adds 1 to two buckets chosen by independent FNV-1a hashes; the count
/// vector is then L2-normalised. There are no trainable parameters.
class TextFeaturizer {
 public:
  explicit TextFeaturizer(int width = 512);

  int width() const { return width_; }

  /// Throws InvalidArgument if no word survives normalisation.
  Eigen::RowVectorXd featurize(std::string_view text) const;

  static std::vector<std::string> normalize(std::string_view text);

 private:
  int width_;
};

}  // namespace emoface::align

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <Eigen/Core>

#include "emoface/tead/store.hpp"

namespace emoface::align {

/// Precomputed image feature vectors keyed by record id.
///
/// File format is CSV: a header `id,f0,f1,...` then one row per record.
class ImageFeatureSet {
 public:
  explicit ImageFeatureSet(int width) : width_(width) {}

  int width() const { return width_; }
  std::size_t size() const { return features_.size(); }
  /// Throws DimensionError on a width mismatch and InvalidArgument on a
  /// duplicate id or non-finite entry.
  void add(const std::string& id, Eigen::RowVectorXd f);
  const Eigen::RowVectorXd* find(const std::string& id) const;
  const std::map<std::string, Eigen::RowVectorXd>& entries() const { return features_; }

  std::string to_csv() const;
  static ImageFeatureSet from_csv(std::string_view text);
  static ImageFeatureSet load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  int width_;
  std::map<std::string, Eigen::RowVectorXd> features_;
};

/// Stand-in for an image encoder on rendered faces: f = tanh(R b + n)
/// with a fixed standard-normal projection R (seeded) and per-record Gaussian noise n
/// of standard deviation `noise` seeded from the record id.
ImageFeatureSet synthesize_image_features(const tead::TEADStore& store, int width,
                                          std::uint64_t seed, double noise = 0.05);

}  // namespace emoface::align

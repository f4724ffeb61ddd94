#include "emoface/align/image_features.hpp"

#include <cmath>
#include <sstream>

#include "emoface/common/error.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/common/text.hpp"
#include "emoface/facs/types.hpp"

namespace emoface::align {

void ImageFeatureSet::add(const std::string& id, Eigen::RowVectorXd f) {
  if (f.size() != width_) throw DimensionError("image feature for '" + id + "' has the wrong width");
  if (!f.allFinite()) throw InvalidArgument("image feature for '" + id + "' is not finite");
  if (!features_.emplace(id, std::move(f)).second)
    throw InvalidArgument("duplicate image feature id '" + id + "'");
}

const Eigen::RowVectorXd* ImageFeatureSet::find(const std::string& id) const {
  auto it = features_.find(id);
  return it == features_.end() ? nullptr : &it->second;
}

std::string ImageFeatureSet::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "id";
  for (int i = 0; i < width_; ++i) os << ",f" << i;
  os << '\n';
  for (const auto& [id, f] : features_) {
    os << id;
    for (Eigen::Index i = 0; i < f.size(); ++i) os << ',' << f[i];
    os << '\n';
  }
  return os.str();
}

ImageFeatureSet ImageFeatureSet::from_csv(std::string_view text) {
  const auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]).rfind("id", 0) != 0)
    throw IoError("image feature file is missing its 'id,f0,...' header");
  const auto header = split(trim(lines[0]), ',');
  if (header.size() < 2) throw IoError("image feature header declares no feature columns");
  ImageFeatureSet set(static_cast<int>(header.size() - 1));
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto line = trim(lines[n]);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw DimensionError("image feature line " + std::to_string(n + 1) + " has " +
                           std::to_string(cells.size() - 1) + " values, expected " +
                           std::to_string(set.width()));
    Eigen::RowVectorXd f(set.width());
    for (int i = 0; i < set.width(); ++i) {
      try {
        f[i] = std::stod(cells[static_cast<std::size_t>(i) + 1]);
      } catch (const std::exception&) {
        throw IoError("image feature line " + std::to_string(n + 1) + ": bad number");
      }
    }
    set.add(trim(cells[0]), std::move(f));
  }
  return set;
}

ImageFeatureSet ImageFeatureSet::load(const std::filesystem::path& path) {
  return from_csv(read_file(path));
}

void ImageFeatureSet::save(const std::filesystem::path& path) const { write_file(path, to_csv()); }

ImageFeatureSet synthesize_image_features(const tead::TEADStore& store, int width,
                                          std::uint64_t seed, double noise) {
  if (width <= 0) throw InvalidArgument("image feature width must be positive");
  const auto n = static_cast<Eigen::Index>(facs::kNumBlendshapes);
  Rng rng(seed);
  Eigen::MatrixXd r(width, n);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.normal();

  ImageFeatureSet set(width);
  for (const auto& q : store.records()) {
    Eigen::VectorXd b(n);
    for (Eigen::Index c = 0; c < n; ++c) b[c] = q.blendshapes[static_cast<std::size_t>(c)];
    Rng local(Rng::derive_seed(seed, fnv1a64(q.id)));
    Eigen::VectorXd f = r * b;
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = std::tanh(f[i] + local.normal(0.0, noise));
    set.add(q.id, f.transpose());
  }
  return set;
}

}  // namespace emoface::align

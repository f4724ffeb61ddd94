#include "emoface/align/text_featurizer.hpp"

#include <cctype>

#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"

namespace emoface::align {

namespace {
constexpr std::uint64_t kSecondBasis = 0x84222325cbf29ce4ULL;
}

TextFeaturizer::TextFeaturizer(int width) : width_(width) {
  if (width < 2) throw InvalidArgument("text feature width must be at least 2");
}

std::vector<std::string> TextFeaturizer::normalize(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (c == '\'') continue;
    if (std::isalnum(c)) cleaned += static_cast<char>(std::tolower(c));
    else cleaned += ' ';
  }
  return split_whitespace(cleaned);
}

Eigen::RowVectorXd TextFeaturizer::featurize(std::string_view text) const {
  const auto words = normalize(text);
  if (words.empty()) throw InvalidArgument("text has no words after normalisation");
  Eigen::RowVectorXd f = Eigen::RowVectorXd::Zero(width_);
  const auto w = static_cast<std::uint64_t>(width_);
  auto add = [&](const std::string& gram) {
    f[static_cast<Eigen::Index>(fnv1a64(gram) % w)] += 1.0;
    f[static_cast<Eigen::Index>(fnv1a64(gram, kSecondBasis) % w)] += 1.0;
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    add(words[i]);
    if (i + 1 < words.size()) add(words[i] + " " + words[i + 1]);
  }
  return f / f.norm();
}

}  // namespace emoface::align

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emoface/common/rng.hpp"
#include "emoface/tead/records.hpp"

namespace emoface::tead {

enum class TextAugOp { StopwordRemoval, SynonymReplace, SentenceShuffle };

std::string_view to_string(TextAugOp op);
/// "stopword_removal" | "synonym_replace" | "sentence_shuffle"
TextAugOp parse_text_aug_op(std::string_view name);

/// Splits after runs of '.', '!' or '?' that are followed by whitespace or
/// the end of the text. Sentences are trimmed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Text augmentation driven by a stop-word list and a synonym table, both
/// shipped as data files (core/data/stopwords.txt, core/data/synonyms.tsv).
class TextAugmenter {
 public:
  static const TextAugmenter& builtin();
  static TextAugmenter from_text(std::string_view stopwords, std::string_view synonyms_tsv);
  static TextAugmenter load(const std::filesystem::path& stopwords,
                            const std::filesystem::path& synonyms_tsv);

  /// Applies the requested ops in the fixed order removal, replacement,
  /// shuffle. Each op degrades to identity when it cannot apply, and an
  /// augmentation that would empty the text returns the input instead.
  /// Throws InvalidArgument if `ops` is empty.
  std::string augment(std::string_view text, Rng& rng, std::span<const TextAugOp> ops) const;

  std::string remove_stopwords(std::string_view text) const;
  std::string replace_synonyms(std::string_view text, Rng& rng) const;
  static std::string shuffle_sentences(std::string_view text, Rng& rng);

  const std::set<std::string>& stopwords() const { return stopwords_; }
  const std::map<std::string, std::vector<std::string>>& synonyms() const { return synonyms_; }

  /// Probability that an eligible word is replaced.
  static constexpr double kSynonymRate = 0.5;

 private:
  std::set<std::string> stopwords_;
  std::map<std::string, std::vector<std::string>> synonyms_;
};

/// augment_text with the shipped tables.
std::string augment_text(std::string_view text, Rng& rng, std::span<const TextAugOp> ops);

enum class TextView { Transcript, Tags, Situation };

/// Tags view joined as "tag1, tag2, tag3".
std::string tags_text(const Quadruple& q);
std::string text_view(const Quadruple& q, TextView view);
/// Draws transcript / tags / situation uniformly.
std::string sample_text_view(const Quadruple& q, Rng& rng, TextView* chosen = nullptr);

}  // namespace emoface::tead

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "emoface/facs/types.hpp"

namespace emoface::tead {

inline constexpr std::size_t kMinTags = 3;
inline constexpr std::size_t kMaxTags = 5;

/// One emotional transcript from the source corpus.
struct CorpusRecord {
  std::string id;
  std::string transcript;

  /// Throws InvalidArgument when the id is empty or the transcript is blank.
  static CorpusRecord make(std::string id, std::string transcript);
};

/// What the annotator extracted from a transcript.
struct Annotation {
  std::vector<std::string> tags;  // lowercase, deduplicated, 3..5 entries
  facs::AUVector aus;
  std::string situation;

  /// Normalises tags (trim, lowercase, drop duplicates keeping first
  /// occurrence) then validates. Throws InvalidArgument.
  static Annotation make(std::vector<std::string> tags, facs::AUVector aus, std::string situation);
};

/// One dataset record: transcript, emotion tags, blendshape weights and
/// situation sentence.
struct Quadruple {
  std::string id;
  std::string transcript;
  std::vector<std::string> tags;
  facs::BlendshapeWeights blendshapes;
  std::string situation;
};

/// trim + lowercase + dedupe, preserving first-seen order. Empty tags dropped.
std::vector<std::string> normalize_tags(const std::vector<std::string>& tags);

/// Throws ValidationError (with `line`) if the record breaks an invariant.
void validate_quadruple(const Quadruple& q, std::size_t line = 0);

/// Corpus input: JSONL objects with "id" and "text" (or "t"), or plain text
/// with one transcript per line (ids become rec-00001, ...).
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);

}  // namespace emoface::tead

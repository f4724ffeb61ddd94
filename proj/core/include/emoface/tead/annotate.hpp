#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "emoface/facs/au_map.hpp"
#include "emoface/tead/client.hpp"
#include "emoface/tead/records.hpp"

namespace emoface::tead {

struct AnnotateConfig {
  /// Total attempts per record (transport failures and malformed replies).
  int max_attempts = 3;
  std::chrono::milliseconds backoff_initial{500};
  double backoff_multiplier = 2.0;
  /// In-flight requests. Output order is the input order regardless.
  int concurrency = 4;
  /// Called with a human-readable line for every failed attempt and skip.
  std::function<void(std::string_view)> log;
};

struct SkippedRecord {
  std::string id;
  std::string reason;
};

struct AnnotateSummary {
  std::size_t produced = 0;
  std::vector<SkippedRecord> skipped;
};

/// Annotates each record and emits one Quadruple per success, in input order,
/// with blendshapes = au_to_blendshapes(annotation.aus, map). Records whose
/// replies stay malformed (or whose transport keeps failing) after
/// max_attempts are skipped and counted; nothing is ever defaulted.
AnnotateSummary annotate_corpus(const std::vector<CorpusRecord>& records, AnnotationClient& client,
                                const facs::AUBlendshapeMap& map, const AnnotateConfig& cfg,
                                const std::function<void(Quadruple)>& sink);

/// Convenience overload collecting into a vector.
std::vector<Quadruple> annotate_corpus(const std::vector<CorpusRecord>& records,
                                       AnnotationClient& client, const facs::AUBlendshapeMap& map,
                                       const AnnotateConfig& cfg, AnnotateSummary* summary = nullptr);

}  // namespace emoface::tead

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emoface/facs/au_map.hpp"
#include "emoface/tead/records.hpp"
#include "emoface/tead/store.hpp"

namespace emoface::tead {

/// Template material for one synthetic emotion cluster.
struct ToyCluster {
  std::string name;
  std::vector<std::string> aus;        // prototype AU labels, always active
  std::vector<std::string> extra_aus;  // occasionally switched on
  std::vector<std::string> tags;
  std::vector<std::string> openers;    // first sentence of a transcript
  std::vector<std::string> closers;    // optional further sentences (at least two)
  std::vector<std::string> situations; // "<who> <situation>."
};

/// The eight shipped clusters: joy, sadness, anger, surprise, fear, disgust,
/// contempt, fatigue.
const std::vector<ToyCluster>& toy_clusters();

struct ToyCorpusOptions {
  std::size_t per_cluster = 25;
  std::uint64_t seed = 0;
};

struct ToyRecord {
  CorpusRecord record;
  Annotation annotation;
  std::size_t cluster = 0;
};

/// Records in cluster-major order with ids "<cluster>-<nnn>". Each record
/// keeps all prototype AUs except, with probability 1/4, one of them, and
/// adds one extra AU with probability 1/4.
std::vector<ToyRecord> make_toy_records(const ToyCorpusOptions& opts,
                                        const facs::AUBlendshapeMap& map);

/// Quadruples built straight from the toy annotations (no client involved).
TEADStore toy_store(const ToyCorpusOptions& opts, const facs::AUBlendshapeMap& map);

/// Writes `<dir>/corpus.jsonl` and `<dir>/fixtures/<key>.txt` replies for
/// every record. The last `malformed` records get broken replies, alternating
/// between a 35-entry AU list and a 6-tag list.
void write_toy_corpus(const std::filesystem::path& dir, const std::vector<ToyRecord>& records,
                      const facs::AUBlendshapeMap& map, std::size_t malformed = 0);

/// Cluster index encoded in a toy id ("anger-012" -> 2).
std::optional<std::size_t> toy_cluster_of(std::string_view id);

}  // namespace emoface::tead

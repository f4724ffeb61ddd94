#include "emoface/tead/records.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"

namespace emoface::tead {

CorpusRecord CorpusRecord::make(std::string id, std::string transcript) {
  if (trim(id).empty()) throw InvalidArgument("corpus record id is empty");
  if (trim(transcript).empty()) throw InvalidArgument("corpus record '" + id + "' has an empty transcript");
  return {std::move(id), std::move(transcript)};
}

std::vector<std::string> normalize_tags(const std::vector<std::string>& tags) {
  std::vector<std::string> out;
  for (const auto& t : tags) {
    std::string n = to_lower(trim(t));
    if (n.empty()) continue;
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
  return out;
}

Annotation Annotation::make(std::vector<std::string> tags, facs::AUVector aus, std::string situation) {
  Annotation a;
  a.tags = normalize_tags(tags);
  if (a.tags.size() < kMinTags || a.tags.size() > kMaxTags)
    throw InvalidArgument("annotation needs 3 to 5 distinct tags, got " + std::to_string(a.tags.size()));
  a.aus = aus;
  a.situation = trim(situation);
  if (a.situation.empty()) throw InvalidArgument("annotation situation is empty");
  return a;
}

void validate_quadruple(const Quadruple& q, std::size_t line) {
  if (trim(q.id).empty()) throw ValidationError("empty id", line);
  if (trim(q.transcript).empty()) throw ValidationError("record '" + q.id + "': empty transcript", line);
  if (trim(q.situation).empty()) throw ValidationError("record '" + q.id + "': empty situation", line);
  if (q.tags.size() < kMinTags || q.tags.size() > kMaxTags)
    throw ValidationError("record '" + q.id + "': needs 3 to 5 tags", line);
  if (normalize_tags(q.tags) != q.tags)
    throw ValidationError("record '" + q.id + "': tags must be lowercase, trimmed and unique", line);
  // BlendshapeWeights enforces its own invariants on construction.
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<CorpusRecord> out;
  const bool jsonl = path.extension() == ".jsonl" || path.extension() == ".json";
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (!jsonl) {
      char id[32];
      std::snprintf(id, sizeof(id), "rec-%05zu", out.size() + 1);
      out.push_back(CorpusRecord::make(id, line));
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("corpus: ") + e.what(), line_no);
    }
    std::string body = j.contains("text") ? j["text"].get<std::string>() : j.value("t", "");
    try {
      out.push_back(CorpusRecord::make(j.value("id", ""), body));
    } catch (const InvalidArgument& e) {
      throw ValidationError(std::string("corpus: ") + e.what(), line_no);
    }
  }
  return out;
}

}  // namespace emoface::tead

#include "emoface/tead/prompt.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"

namespace emoface::tead {

std::string build_annotation_prompt(const CorpusRecord& record, const facs::AUBlendshapeMap& au_table) {
  std::ostringstream p;
  p << "You annotate emotional text with facial expressions described in the Facial Action "
       "Coding System (FACS).\n\n"
       "Given a transcript:\n"
       "1. List 3 to 5 single-word emotion tags that describe the speaker's emotions.\n"
       "2. Imagine the speaker's face while saying it and mark which of the Action Units "
       "below are activated (1) or not (0).\n"
       "3. Write one sentence describing a situation that could evoke these emotions.\n\n"
       "Action Units, in order:\n";
  const auto& labels = au_table.au_names();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    p << i + 1 << ". " << labels[i];
    const auto desc = facs::au_description(labels[i]);
    if (!desc.empty()) p << " (" << desc << ")";
    p << '\n';
  }
  p << "\nReply with exactly one fenced JSON object and nothing else:\n"
       "```json\n"
       "{\"tags\": [\"<tag>\", ...], \"aus\": [<"
    << labels.size()
    << " values, each 0 or 1, in the order above>], \"situation\": \"<one sentence>\"}\n"
       "```\n\n"
       "Example transcript: \"My flight got cancelled again and nobody will tell us why.\"\n"
       "Example tags: [\"frustration\", \"anger\", \"helplessness\"]\n\n"
       "Transcript:\n\"\"\"\n"
    << record.transcript << "\n\"\"\"\n";
  return p.str();
}

namespace {

std::string extract_json_object(std::string_view raw) {
  const std::string text(raw);
  auto fence = text.find("```");
  if (fence != std::string::npos) {
    auto body_start = text.find('\n', fence);
    if (body_start == std::string::npos) throw MalformedResponse("unterminated code fence");
    auto end = text.find("```", body_start);
    if (end == std::string::npos) throw MalformedResponse("unterminated code fence");
    return trim(std::string_view(text).substr(body_start + 1, end - body_start - 1));
  }
  std::string t = trim(text);
  if (t.empty() || t.front() != '{' || t.back() != '}')
    throw MalformedResponse("reply contains no JSON object");
  return t;
}

}  // namespace

Annotation parse_annotation(std::string_view raw) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(extract_json_object(raw));
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedResponse(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw MalformedResponse("reply is not a JSON object");
  for (const char* key : {"tags", "aus", "situation"})
    if (!j.contains(key)) throw MalformedResponse(std::string("missing field '") + key + "'");

  if (!j["tags"].is_array()) throw MalformedResponse("'tags' must be an array");
  std::vector<std::string> tags;
  for (const auto& t : j["tags"]) {
    if (!t.is_string()) throw MalformedResponse("'tags' entries must be strings");
    tags.push_back(t.get<std::string>());
  }

  std::vector<int> bits;
  const auto& aus = j["aus"];
  if (aus.is_array()) {
    for (const auto& v : aus) {
      if (!v.is_number_integer()) throw MalformedResponse("AU values must be 0 or 1");
      bits.push_back(v.get<int>());
    }
  } else if (aus.is_string()) {
    for (const auto& cell : split(aus.get<std::string>(), ',')) {
      const auto c = trim(cell);
      if (c != "0" && c != "1") throw MalformedResponse("AU values must be 0 or 1");
      bits.push_back(c == "1");
    }
  } else {
    throw MalformedResponse("'aus' must be an array of bits");
  }
  if (bits.size() != facs::kNumAUs)
    throw MalformedResponse("expected " + std::to_string(facs::kNumAUs) + " AU values, got " +
                            std::to_string(bits.size()));
  for (int b : bits)
    if (b != 0 && b != 1) throw MalformedResponse("AU values must be 0 or 1");

  if (!j["situation"].is_string()) throw MalformedResponse("'situation' must be a string");
  try {
    return Annotation::make(std::move(tags), facs::AUVector(bits), j["situation"].get<std::string>());
  } catch (const InvalidArgument& e) {
    throw MalformedResponse(e.what());
  }
}

std::string format_annotation_response(const Annotation& a) {
  nlohmann::ordered_json j;
  j["tags"] = a.tags;
  j["aus"] = a.aus.to_ints();
  j["situation"] = a.situation;
  return "```json\n" + j.dump() + "\n```\n";
}

}  // namespace emoface::tead

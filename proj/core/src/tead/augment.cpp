#include "emoface/tead/augment.hpp"

#include <algorithm>
#include <cctype>

#include "emoface/common/embedded_data.hpp"
#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"

namespace emoface::tead {
namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Splits a whitespace token into leading punctuation, core word, trailing
// punctuation so "happy!" matches the table entry "happy".
struct Token {
  std::string lead, core, trail;
};

Token split_token(const std::string& tok) {
  std::size_t b = 0, e = tok.size();
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '\''; };
  while (b < e && !alnum(tok[b])) ++b;
  while (e > b && !alnum(tok[e - 1])) --e;
  return {tok.substr(0, b), tok.substr(b, e - b), tok.substr(e)};
}

std::string match_case(const std::string& replacement, const std::string& original) {
  std::string out = replacement;
  if (!original.empty() && std::isupper(static_cast<unsigned char>(original[0])) && !out.empty())
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace

std::string_view to_string(TextAugOp op) {
  switch (op) {
    case TextAugOp::StopwordRemoval: return "stopword_removal";
    case TextAugOp::SynonymReplace: return "synonym_replace";
    case TextAugOp::SentenceShuffle: return "sentence_shuffle";
  }
  return "?";
}

TextAugOp parse_text_aug_op(std::string_view name) {
  for (auto op : {TextAugOp::StopwordRemoval, TextAugOp::SynonymReplace, TextAugOp::SentenceShuffle})
    if (to_string(op) == name) return op;
  throw InvalidArgument("unknown text augmentation '" + std::string(name) + "'");
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_terminator(text[i])) continue;
    std::size_t j = i;
    while (j + 1 < text.size() && is_terminator(text[j + 1])) ++j;
    if (j + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[j + 1]))) {
      auto s = trim(text.substr(start, j + 1 - start));
      if (!s.empty()) out.push_back(std::move(s));
      start = j + 1;
    }
    i = j;
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

const TextAugmenter& TextAugmenter::builtin() {
  static const TextAugmenter aug = from_text(embedded::stopwords_txt(), embedded::synonyms_tsv());
  return aug;
}

TextAugmenter TextAugmenter::from_text(std::string_view stopwords, std::string_view synonyms_tsv) {
  TextAugmenter a;
  for (const auto& raw : split(stopwords, '\n')) {
    auto w = to_lower(trim(raw));
    if (!w.empty() && w[0] != '#') a.stopwords_.insert(w);
  }
  std::size_t line_no = 0;
  for (const auto& raw : split(synonyms_tsv, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw ValidationError("synonym table needs word<TAB>replacements", line_no);
    std::vector<std::string> reps;
    for (const auto& r : split(cols[1], ',')) {
      auto t = to_lower(trim(r));
      if (!t.empty()) reps.push_back(t);
    }
    if (reps.empty()) throw ValidationError("synonym entry without replacements", line_no);
    a.synonyms_[to_lower(trim(cols[0]))] = std::move(reps);
  }
  return a;
}

TextAugmenter TextAugmenter::load(const std::filesystem::path& stopwords,
                                  const std::filesystem::path& synonyms_tsv) {
  return from_text(read_file(stopwords), read_file(synonyms_tsv));
}

std::string TextAugmenter::remove_stopwords(std::string_view text) const {
  std::vector<std::string> kept;
  for (const auto& tok : split_whitespace(text)) {
    const Token t = split_token(tok);
    if (!t.core.empty() && stopwords_.count(to_lower(t.core))) {
      // Keep a sentence terminator attached to the dropped word.
      if (!kept.empty() && !t.trail.empty() && is_terminator(t.trail.back()) &&
          !is_terminator(kept.back().back()))
        kept.back() += t.trail;
      continue;
    }
    kept.push_back(tok);
  }
  return join(kept, " ");
}

std::string TextAugmenter::replace_synonyms(std::string_view text, Rng& rng) const {
  std::vector<std::string> out;
  for (const auto& tok : split_whitespace(text)) {
    Token t = split_token(tok);
    auto it = synonyms_.find(to_lower(t.core));
    if (it != synonyms_.end() && rng.bernoulli(kSynonymRate)) {
      const auto& rep = it->second[rng.index(it->second.size())];
      out.push_back(t.lead + match_case(rep, t.core) + t.trail);
    } else {
      out.push_back(tok);
    }
  }
  return join(out, " ");
}

std::string TextAugmenter::shuffle_sentences(std::string_view text, Rng& rng) {
  auto sentences = split_sentences(text);
  if (sentences.size() < 2) return std::string(text);
  std::shuffle(sentences.begin(), sentences.end(), rng.engine());
  return join(sentences, " ");
}

std::string TextAugmenter::augment(std::string_view text, Rng& rng,
                                   std::span<const TextAugOp> ops) const {
  if (ops.empty()) throw InvalidArgument("augment_text needs at least one operation");
  auto has = [&](TextAugOp op) { return std::find(ops.begin(), ops.end(), op) != ops.end(); };
  std::string out(text);
  if (has(TextAugOp::StopwordRemoval)) {
    auto reduced = remove_stopwords(out);
    if (!trim(reduced).empty()) out = std::move(reduced);
  }
  if (has(TextAugOp::SynonymReplace)) out = replace_synonyms(out, rng);
  if (has(TextAugOp::SentenceShuffle)) out = shuffle_sentences(out, rng);
  if (trim(out).empty()) return std::string(text);
  return out;
}

std::string augment_text(std::string_view text, Rng& rng, std::span<const TextAugOp> ops) {
  return TextAugmenter::builtin().augment(text, rng, ops);
}

std::string tags_text(const Quadruple& q) { return join(q.tags, ", "); }

std::string text_view(const Quadruple& q, TextView view) {
  switch (view) {
    case TextView::Transcript: return q.transcript;
    case TextView::Tags: return tags_text(q);
    case TextView::Situation: return q.situation;
  }
  return q.transcript;
}

std::string sample_text_view(const Quadruple& q, Rng& rng, TextView* chosen) {
  const auto view = static_cast<TextView>(rng.index(3));
  if (chosen) *chosen = view;
  return text_view(q, view);
}

}  // namespace emoface::tead

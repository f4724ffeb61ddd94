#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"
#include "emoface/facs/blendshapes.hpp"
#include "emoface/tead/annotate.hpp"
#include "emoface/tead/augment.hpp"
#include "emoface/tead/prompt.hpp"
#include "emoface/tead/store.hpp"
#include "emoface/tead/toy_corpus.hpp"

namespace emoface::tead {
namespace {

namespace fs = std::filesystem;
const facs::AUBlendshapeMap& shipped() { return facs::AUBlendshapeMap::builtin(); }

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("emoface_test_tead_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

facs::AUVector aus_from(std::initializer_list<const char*> labels) {
  facs::AUVector u;
  for (const char* l : labels) u.set(shipped().au_index(l), true);
  return u;
}

std::string bits_string(const facs::AUVector& u) {
  std::vector<std::string> parts;
  for (int b : u.to_ints()) parts.push_back(std::to_string(b));
  return join(parts, ",");
}

Quadruple quad(const std::string& id, double fill = 0.2) {
  return {id, "some text " + id, {"calm", "neutral", "still"}, facs::BlendshapeWeights::filled(fill),
          "Someone waits."};
}

TEADStore store_of(std::size_t n) {
  TEADStore s(5);
  for (std::size_t i = 0; i < n; ++i) s.add(quad("r" + std::to_string(i)));
  return s;
}

TEST(CorpusRecord, BlankTranscriptRejected) {
  EXPECT_THROW(CorpusRecord::make("a", "   "), InvalidArgument);
  EXPECT_THROW(CorpusRecord::make("", "text"), InvalidArgument);
}

TEST(Annotation, TagsNormalisedAndBounded) {
  const auto a = Annotation::make({" Happy", "happy", "JOY", "warm"}, {}, "A friend visits.");
  EXPECT_EQ(a.tags, (std::vector<std::string>{"happy", "joy", "warm"}));
  EXPECT_THROW(Annotation::make({"a", "b"}, {}, "x."), InvalidArgument);
  EXPECT_THROW(Annotation::make({"a", "b", "c", "d", "e", "f"}, {}, "x."), InvalidArgument);
  EXPECT_THROW(Annotation::make({"a", "b", "c"}, {}, "  "), InvalidArgument);
}

TEST(Prompt, ContainsTranscriptOnceAndEveryAU) {
  const auto rec = CorpusRecord::make("r1", "I can't stop smiling today");
  const std::string p = build_annotation_prompt(rec, shipped());
  const auto first = p.find(rec.transcript);
  ASSERT_NE(first, std::string::npos);
  EXPECT_EQ(p.find(rec.transcript, first + 1), std::string::npos);
  for (const auto& label : shipped().au_names()) EXPECT_NE(p.find(label), std::string::npos) << label;
  EXPECT_NE(p.find("```json"), std::string::npos);
  EXPECT_EQ(p, build_annotation_prompt(rec, shipped()));
}

TEST(Parse, FixtureRoundTrip) {
  const auto u = aus_from({"AU6", "AU12", "AU25"});
  const auto a = Annotation::make({"happy", "joy", "delight", "warm"}, u, "A friend calls.");
  const auto back = parse_annotation(format_annotation_response(a));
  EXPECT_EQ(back.tags, a.tags);
  EXPECT_EQ(back.aus, a.aus);
  EXPECT_EQ(back.situation, a.situation);
}

TEST(Parse, CommaSeparatedBitsAccepted) {
  const auto u = aus_from({"AU1", "AU4"});
  const std::string raw = "Sure.\n```json\n{\"tags\": [\"sad\", \"low\", \"tired\", \"gray\"], \"aus\": \"" +
                          bits_string(u) + "\", \"situation\": \"It rains.\"}\n```\n";
  const auto a = parse_annotation(raw);
  EXPECT_EQ(a.aus, u);
  EXPECT_EQ(a.tags.size(), 4u);
}

TEST(Parse, MalformedRepliesRejected) {
  const std::string bits35 = bits_string(facs::AUVector{}).substr(2);
  const std::string bits = bits_string(facs::AUVector{});
  auto reply = [](const std::string& tags, const std::string& aus, const std::string& sit) {
    return "```json\n{\"tags\": " + tags + ", \"aus\": " + aus + ", \"situation\": " + sit + "}\n```";
  };
  const std::string tags4 = R"(["a", "b", "c", "d"])";
  EXPECT_THROW(parse_annotation(reply(tags4, "\"" + bits35 + "\"", "\"s.\"")), MalformedResponse);
  EXPECT_THROW(parse_annotation(reply(R"(["a","b","c","d","e","f"])", "\"" + bits + "\"", "\"s.\"")),
               MalformedResponse);
  std::string bad = bits;
  bad[0] = '2';
  EXPECT_THROW(parse_annotation(reply(tags4, "\"" + bad + "\"", "\"s.\"")), MalformedResponse);
  EXPECT_THROW(parse_annotation("```json\n{\"tags\": [\"a\",\"b\",\"c\"], \"situation\": \"s.\"}\n```"),
               MalformedResponse);
  EXPECT_THROW(parse_annotation(reply(tags4, "\"" + bits + "\"", "\"\"")), MalformedResponse);
  EXPECT_THROW(parse_annotation("no json here"), MalformedResponse);
}

struct ToyFixtures {
  fs::path dir;
  std::vector<ToyRecord> records;
};

ToyFixtures toy_fixtures(const std::string& name, std::size_t count, std::size_t malformed) {
  ToyFixtures f{scratch_dir(name), make_toy_records({2, 17}, shipped())};
  f.records.resize(count);
  write_toy_corpus(f.dir, f.records, shipped(), malformed);
  return f;
}

TEST(Annotate, AllWellFormedFixtures) {
  const auto f = toy_fixtures("ok", 10, 0);
  FixtureClient client(f.dir / "fixtures");
  AnnotateSummary summary;
  const auto out = annotate_corpus(load_corpus(f.dir / "corpus.jsonl"), client, shipped(), {}, &summary);
  EXPECT_EQ(out.size(), 10u);
  EXPECT_EQ(summary.produced, 10u);
  EXPECT_TRUE(summary.skipped.empty());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].id, f.records[i].record.id);
    EXPECT_EQ(out[i].blendshapes, facs::au_to_blendshapes(f.records[i].annotation.aus, shipped()));
  }
}

TEST(Annotate, MalformedFixtureSkippedAndCounted) {
  const auto f = toy_fixtures("bad", 10, 1);
  FixtureClient client(f.dir / "fixtures");
  std::vector<std::string> log;
  AnnotateConfig cfg;
  cfg.log = [&](std::string_view s) { log.emplace_back(s); };
  AnnotateSummary summary;
  const auto out = annotate_corpus(load_corpus(f.dir / "corpus.jsonl"), client, shipped(), cfg, &summary);
  EXPECT_EQ(out.size(), 9u);
  ASSERT_EQ(summary.skipped.size(), 1u);
  EXPECT_EQ(summary.skipped[0].id, f.records.back().record.id);
  EXPECT_FALSE(summary.skipped[0].reason.empty());
  EXPECT_FALSE(log.empty());
}

TEST(Annotate, HappyFixtureActivatesSmile) {
  const auto dir = scratch_dir("happy");
  const auto rec = CorpusRecord::make("h1", "I can't stop smiling today");
  const auto ann = Annotation::make({"happy", "joy", "cheerful"}, aus_from({"AU6", "AU12"}), "A friend visits.");
  FixtureClient::write_fixture(dir, build_annotation_prompt(rec, shipped()), format_annotation_response(ann));
  FixtureClient client(dir);
  const auto out = annotate_corpus({rec}, client, shipped(), {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_GT(out[0].blendshapes[shipped().blendshape_index("mouthSmileLeft")], 0.0);
  EXPECT_GT(out[0].blendshapes[shipped().blendshape_index("mouthSmileRight")], 0.0);
}

// Fails twice with a transport error, then answers.
class FlakyClient : public AnnotationClient {
 public:
  explicit FlakyClient(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const std::string&) override {
    if (calls_++ < 2) throw TransportError("connection reset");
    return reply_;
  }
  std::string name() const override { return "flaky"; }
  bool wants_backoff() const override { return false; }
  std::atomic<int> calls_{0};

 private:
  std::string reply_;
};

TEST(Annotate, TransportFailuresRetriedWithinBudget) {
  const auto ann = Annotation::make({"calm", "still", "quiet"}, aus_from({"AU43"}), "Night falls.");
  const auto rec = CorpusRecord::make("c1", "All is quiet now.");
  {
    FlakyClient client(format_annotation_response(ann));
    AnnotateConfig cfg;
    cfg.max_attempts = 3;
    const auto out = annotate_corpus({rec}, client, shipped(), cfg);
    EXPECT_EQ(out.size(), 1u);
    EXPECT_EQ(client.calls_, 3);
  }
  {
    FlakyClient client(format_annotation_response(ann));
    AnnotateConfig cfg;
    cfg.max_attempts = 2;
    AnnotateSummary summary;
    const auto out = annotate_corpus({rec}, client, shipped(), cfg, &summary);
    EXPECT_TRUE(out.empty());
    EXPECT_EQ(summary.skipped.size(), 1u);
    EXPECT_EQ(client.calls_, 2);
  }
}

TEST(Annotate, FixtureBuildIsByteReproducible) {
  const auto f = toy_fixtures("repro", 16, 2);
  auto build = [&] {
    FixtureClient client(f.dir / "fixtures");
    TEADStore s;
    AnnotateConfig cfg;
    cfg.concurrency = 3;
    for (auto& q : annotate_corpus(load_corpus(f.dir / "corpus.jsonl"), client, shipped(), cfg)) s.add(q);
    return s.to_jsonl();
  };
  EXPECT_EQ(build(), build());
}

TEST(Augment, StopwordRemovalWithShippedList) {
  const auto& aug = TextAugmenter::builtin();
  for (const char* w : {"the", "is", "very"}) EXPECT_TRUE(aug.stopwords().count(w)) << w;
  EXPECT_EQ(aug.remove_stopwords("the cat is very happy"), "cat happy");
  Rng rng(0);
  const TextAugOp op = TextAugOp::StopwordRemoval;
  EXPECT_EQ(augment_text("the cat is very happy", rng, {&op, 1}), "cat happy");
}

TEST(Augment, SingleSentenceShuffleUnchanged) {
  Rng rng(3);
  EXPECT_EQ(TextAugmenter::shuffle_sentences("Only one sentence here.", rng), "Only one sentence here.");
}

TEST(Augment, ShuffleIsPermutationOfSentences) {
  const std::string text = "First one. Second one! Third one? Fourth one.";
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  bool changed = false;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::string out = TextAugmenter::shuffle_sentences(text, rng);
    ASSERT_EQ(sorted(split_sentences(out)), sorted(split_sentences(text)));
    changed = changed || out != text;
  }
  EXPECT_TRUE(changed);
}

TEST(Augment, SynonymsComeOnlyFromTable) {
  const auto& aug = TextAugmenter::builtin();
  const std::string text = "happy glad cheerful angry sad tired scared";
  const auto in = split_whitespace(text);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const auto out = split_whitespace(aug.replace_synonyms(text, rng));
    ASSERT_EQ(out.size(), in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (out[i] == in[i]) continue;
      const auto it = aug.synonyms().find(in[i]);
      ASSERT_NE(it, aug.synonyms().end()) << in[i];
      EXPECT_NE(std::find(it->second.begin(), it->second.end(), out[i]), it->second.end()) << out[i];
    }
  }
}

TEST(Augment, NeverEmptyAndDeterministic) {
  const std::vector<TextAugOp> all{TextAugOp::StopwordRemoval, TextAugOp::SynonymReplace,
                                   TextAugOp::SentenceShuffle};
  for (const std::string text : {"the is very", "a", "I am happy. You are sad.", "so so so"}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng r1(seed), r2(seed);
      const auto a = augment_text(text, r1, all);
      EXPECT_FALSE(trim(a).empty()) << text;
      EXPECT_EQ(a, augment_text(text, r2, all));
    }
  }
  Rng rng(0);
  EXPECT_THROW(augment_text("x", rng, {}), InvalidArgument);
}

TEST(Augment, OpNamesRoundTrip) {
  for (auto op : {TextAugOp::StopwordRemoval, TextAugOp::SynonymReplace, TextAugOp::SentenceShuffle})
    EXPECT_EQ(parse_text_aug_op(to_string(op)), op);
  EXPECT_THROW(parse_text_aug_op("back_translate"), InvalidArgument);
}

TEST(TextView, AllThreeViewsAppear) {
  const auto q = quad("v1");
  std::map<TextView, int> seen;
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    TextView v;
    const std::string s = sample_text_view(q, rng, &v);
    EXPECT_EQ(s, text_view(q, v));
    ++seen[v];
  }
  EXPECT_EQ(seen.size(), 3u);
  for (const auto& [v, n] : seen) EXPECT_GT(n, 250);
}

TEST(TextView, DegenerateQuadrupleAlwaysSameText) {
  Quadruple q = quad("v2");
  q.transcript = q.situation = tags_text(q);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_text_view(q, rng), "calm, neutral, still");
  Rng a(9), b(9);
  TextView va, vb;
  sample_text_view(q, a, &va);
  sample_text_view(q, b, &vb);
  EXPECT_EQ(va, vb);
}

TEST(Store, JsonlRoundTripAndDuplicateIds) {
  auto s = store_of(3);
  EXPECT_THROW(s.add(quad("r1")), ValidationError);
  const auto back = TEADStore::from_jsonl(s.to_jsonl());
  EXPECT_EQ(back.to_jsonl(), s.to_jsonl());
  ASSERT_NE(back.find("r2"), nullptr);
  EXPECT_EQ(back.find("zz"), nullptr);
  EXPECT_EQ(s.subset({"r2", "r0"}).records()[0].id, "r2");
}

TEST(Store, InvalidLineNamed) {
  std::istringstream lines(store_of(4).to_jsonl());
  std::string text, line;
  for (int n = 1; std::getline(lines, line); ++n) {
    if (n == 3) line.replace(line.find("\"b\":[") + 5, 0, "0.5,");
    text += line + "\n";
  }
  try {
    TEADStore::from_jsonl(text);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(TEADStore::from_jsonl("{\"id\": \"x\"}\n"), ValidationError);
  EXPECT_THROW(TEADStore::from_jsonl("not json\n"), ValidationError);
}

TEST(Split, NinetyTenOfHundred) {
  const auto split = split_dataset(store_of(100), 0.9);
  EXPECT_EQ(split.train.size(), 90u);
  EXPECT_EQ(split.test.size(), 10u);
  EXPECT_FALSE(split.warning);
}

TEST(Split, SingleRecordGoesToTrainWithWarning) {
  const auto split = split_dataset(store_of(1), 0.9);
  EXPECT_EQ(split.train.size(), 1u);
  EXPECT_TRUE(split.test.empty());
  EXPECT_TRUE(split.warning);
}

TEST(Split, DeterministicPartitionUnderSeed) {
  const auto s = store_of(57);
  const auto a = split_dataset(s, 0.7), b = split_dataset(s, 0.7);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  std::set<std::string> all(a.train.begin(), a.train.end());
  for (const auto& id : a.test) EXPECT_TRUE(all.insert(id).second) << id;
  EXPECT_EQ(all.size(), 57u);
  EXPECT_EQ(a.train.size(), 40u);  // round(0.7 * 57) = round(39.9)
  auto other = store_of(57);
  other.set_split_seed(6);
  EXPECT_NE(split_dataset(other, 0.7).train, a.train);
}

TEST(Split, FractionOutOfRangeThrows) {
  EXPECT_THROW(split_dataset(store_of(3), 0.0), InvalidArgument);
  EXPECT_THROW(split_dataset(store_of(3), 1.0), InvalidArgument);
}

TEST(ToyCorpus, ClustersAndIds) {
  const auto recs = make_toy_records({3, 1}, shipped());
  EXPECT_EQ(recs.size(), 3 * toy_clusters().size());
  EXPECT_EQ(toy_cluster_of("anger-012"), 2u);
  EXPECT_FALSE(toy_cluster_of("nobody-001"));
  std::set<std::string> transcripts;
  for (const auto& r : make_toy_records({25, 0}, shipped())) EXPECT_TRUE(transcripts.insert(r.record.transcript).second);
  EXPECT_EQ(toy_store({25, 0}, shipped()).size(), 200u);
}

}  // namespace
}  // namespace emoface::tead

#include "emoface/tead/toy_corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "emoface/common/error.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/common/text.hpp"
#include "emoface/facs/blendshapes.hpp"
#include "emoface/tead/client.hpp"
#include "emoface/tead/prompt.hpp"

namespace emoface::tead {

namespace {

const std::vector<std::string> kWho = {
    "A student", "My neighbour", "An old friend", "The new intern", "A young mother",
    "My brother", "A retired teacher", "The shop owner", "A tourist", "My roommate"};

}  // namespace

const std::vector<ToyCluster>& toy_clusters() {
  static const std::vector<ToyCluster> clusters = {
      {"joy",
       {"AU6", "AU12", "AU25"},
       {"AU26", "AU2"},
       {"happy", "joyful", "cheerful", "delighted", "glad", "elated", "content"},
       {"I got the job I always wanted!", "We finally won the championship.",
        "My best friend surprised me with a party tonight.", "The test results came back perfect.",
        "I can't stop smiling today.", "Our little garden finally bloomed."},
       {"Everything feels bright.", "I want to tell everyone.", "Life is good right now.",
        "What a wonderful day."},
       {"receives great news about a long awaited promotion",
        "celebrates a victory with close friends", "laughs at a birthday surprise"}},
      {"sadness",
       {"AU1", "AU4", "AU15", "AU17"},
       {"AU11", "AU41"},
       {"sad", "sorrowful", "gloomy", "heartbroken", "melancholy", "downcast", "grieving"},
       {"My old dog passed away this morning.", "She moved away and I miss her already.",
        "Nobody came to my recital.", "I lost the letters from my grandmother.",
        "The house feels empty without them.", "I failed the exam again."},
       {"I keep looking at old photos.", "It hurts more than I expected.",
        "I just want to stay in bed.", "Nothing feels the same."},
       {"says goodbye to a close friend at the station", "mourns the loss of a beloved pet",
        "reads an old letter alone at night"}},
      {"anger",
       {"AU4", "AU5", "AU7", "AU23", "AU24"},
       {"AU9", "AU17"},
       {"angry", "furious", "irritated", "enraged", "resentful", "hostile", "indignant"},
       {"They cancelled my flight without telling me!", "Someone scratched my car and drove off.",
        "He took credit for my work again.", "The landlord kept our deposit for no reason.",
        "I was on hold for three hours.", "They lied to my face."},
       {"This is completely unacceptable.", "I am done being polite.",
        "Somebody is going to hear about this.", "I can feel my blood boiling."},
       {"confronts a coworker who stole credit", "argues with a rude customer service agent",
        "slams the door after a heated fight"}},
      {"surprise",
       {"AU1", "AU2", "AU5", "AU26", "AU27"},
       {"AU25"},
       {"surprised", "astonished", "amazed", "startled", "stunned", "shocked", "awed"},
       {"I never expected to see him here!", "The box was full of old coins.",
        "She said yes before I finished asking.", "The lights came on all at once.",
        "A deer jumped right in front of us.", "I won the raffle out of nowhere."},
       {"I could not believe my eyes.", "Nobody saw that coming.", "My jaw literally dropped.",
        "What are the odds?"},
       {"opens an unexpected package at the door", "spots a celebrity in a small cafe",
        "hears shocking news on the radio"}},
      {"fear",
       {"AU1", "AU2", "AU4", "AU5", "AU20", "AU26"},
       {"AU25", "AU7"},
       {"afraid", "scared", "terrified", "anxious", "nervous", "frightened", "panicked"},
       {"Someone is following me home.", "I heard footsteps in the empty house.",
        "The plane started shaking badly.", "My test results are coming tomorrow.",
        "The power went out during the storm.", "The dog next door broke its chain."},
       {"My hands will not stop shaking.", "I want to run and hide.",
        "My heart is pounding so hard.", "Please let it be nothing."},
       {"walks alone down a dark alley at night", "hears a strange noise in the basement",
        "waits for the results of a medical test"}},
      {"disgust",
       {"AU9", "AU10", "AU15", "AU16"},
       {"AU4", "AU25"},
       {"disgusted", "repulsed", "revolted", "nauseated", "sickened", "appalled", "grossed out"},
       {"There was a hair in my soup.", "The fridge smelled like rotten eggs.",
        "He chewed with his mouth wide open.", "The bathroom floor was covered in slime.",
        "Someone left mouldy food in the sink.", "The milk had turned into lumps."},
       {"I almost threw up.", "I cannot eat anything now.", "That was absolutely vile.",
        "Get it away from me."},
       {"finds spoiled food in the office fridge", "steps into something sticky on the bus",
        "smells a foul odour from the trash"}},
      {"contempt",
       {"AU14", "AU24", "AU63"},
       {"AU2"},
       {"contemptuous", "scornful", "disdainful", "dismissive", "condescending", "sneering",
        "superior"},
       {"As if his opinion mattered to anyone.", "She calls that mess a painting?",
        "They think money makes them better than us.", "His excuse was pathetic as usual.",
        "Of course he cheated to get ahead.", "Their so called expert knows nothing."},
       {"I cannot take them seriously.", "What a joke.", "Some people never learn.",
        "Not worth my time."},
       {"rolls their eyes at a pompous speech", "scoffs at a rival who cheated",
        "looks down on a boastful neighbour"}},
      {"fatigue",
       {"AU41", "AU43", "AU64"},
       {"AU26", "AU1"},
       {"tired", "exhausted", "sleepy", "drained", "weary", "drowsy", "fatigued"},
       {"I worked three night shifts in a row.", "The baby kept me up all night.",
        "We drove for fourteen hours straight.", "I have not slept since Monday.",
        "The meeting dragged on forever.", "My legs feel like lead after the hike."},
       {"I can barely keep my eyes open.", "I need a week of sleep.",
        "Everything feels heavy.", "Just let me lie down."},
       {"yawns through a long late meeting", "collapses on the couch after a double shift",
        "nods off on the morning train"}},
  };
  return clusters;
}

std::vector<ToyRecord> make_toy_records(const ToyCorpusOptions& opts,
                                        const facs::AUBlendshapeMap& map) {
  if (opts.per_cluster == 0) throw InvalidArgument("toy corpus needs at least one record per cluster");
  const auto& clusters = toy_clusters();
  Rng rng(opts.seed);
  std::vector<ToyRecord> out;
  out.reserve(clusters.size() * opts.per_cluster);
  std::set<std::string> seen;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& cl = clusters[c];
    for (std::size_t i = 0; i < opts.per_cluster; ++i) {
      facs::AUVector aus;
      for (const auto& label : cl.aus) aus.set(map.au_index(label), true);
      if (cl.aus.size() > 2 && rng.uniform() < 0.25)
        aus.set(map.au_index(cl.aus[rng.index(cl.aus.size())]), false);
      if (!cl.extra_aus.empty() && rng.uniform() < 0.25)
        aus.set(map.au_index(cl.extra_aus[rng.index(cl.extra_aus.size())]), true);

      std::vector<std::string> pool = cl.tags;
      std::shuffle(pool.begin(), pool.end(), rng.engine());
      pool.resize(kMinTags + rng.index(kMaxTags - kMinTags + 1));

      // Transcripts are redrawn until unseen: fixture replies are keyed by
      // prompt, so two records with one transcript would share a reply.
      std::string transcript;
      for (int attempt = 0; attempt < 100; ++attempt) {
        transcript = cl.openers[rng.index(cl.openers.size())];
        if (rng.uniform() < 0.6) {
          const std::size_t first = rng.index(cl.closers.size());
          transcript += " " + cl.closers[first];
          if (rng.uniform() < 0.3)
            transcript += " " + cl.closers[(first + 1 + rng.index(cl.closers.size() - 1)) % cl.closers.size()];
        }
        if (seen.insert(transcript).second) break;
      }
      std::string situation =
          kWho[rng.index(kWho.size())] + " " + cl.situations[rng.index(cl.situations.size())] + ".";

      char id[64];
      std::snprintf(id, sizeof id, "%s-%03zu", cl.name.c_str(), i);
      out.push_back({CorpusRecord::make(id, std::move(transcript)),
                     Annotation::make(std::move(pool), aus, std::move(situation)), c});
    }
  }
  return out;
}

TEADStore toy_store(const ToyCorpusOptions& opts, const facs::AUBlendshapeMap& map) {
  TEADStore store(opts.seed);
  for (const auto& r : make_toy_records(opts, map))
    store.add({r.record.id, r.record.transcript, r.annotation.tags,
               facs::au_to_blendshapes(r.annotation.aus, map), r.annotation.situation});
  return store;
}

void write_toy_corpus(const std::filesystem::path& dir, const std::vector<ToyRecord>& records,
                      const facs::AUBlendshapeMap& map, std::size_t malformed) {
  if (malformed > records.size()) throw InvalidArgument("more malformed replies than records");
  std::string corpus;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    nlohmann::ordered_json line;
    line["id"] = r.record.id;
    line["text"] = r.record.transcript;
    corpus += line.dump() + "\n";

    std::string reply;
    const std::size_t broken_rank = records.size() - i;  // 1 for the last record
    if (broken_rank <= malformed) {
      nlohmann::ordered_json j;
      if (broken_rank % 2 == 1) {
        auto bits = r.annotation.aus.to_ints();
        bits.pop_back();
        j["tags"] = r.annotation.tags;
        j["aus"] = bits;
      } else {
        j["tags"] = {"a", "b", "c", "d", "e", "f"};
        j["aus"] = r.annotation.aus.to_ints();
      }
      j["situation"] = r.annotation.situation;
      reply = "```json\n" + j.dump() + "\n```\n";
    } else {
      reply = format_annotation_response(r.annotation);
    }
    FixtureClient::write_fixture(dir / "fixtures", build_annotation_prompt(r.record, map), reply);
  }
  write_file(dir / "corpus.jsonl", corpus);
}

std::optional<std::size_t> toy_cluster_of(std::string_view id) {
  const auto dash = id.rfind('-');
  if (dash == std::string_view::npos) return std::nullopt;
  const auto prefix = id.substr(0, dash);
  const auto& clusters = toy_clusters();
  for (std::size_t c = 0; c < clusters.size(); ++c)
    if (clusters[c].name == prefix) return c;
  return std::nullopt;
}

}  // namespace emoface::tead

#include "emoface/tead/annotate.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <thread>
#include <variant>

#include "emoface/common/error.hpp"
#include "emoface/facs/blendshapes.hpp"
#include "emoface/tead/prompt.hpp"

namespace emoface::tead {
namespace {

using Outcome = std::variant<Quadruple, SkippedRecord>;

Outcome annotate_one(const CorpusRecord& rec, AnnotationClient& client,
                     const facs::AUBlendshapeMap& map, const AnnotateConfig& cfg) {
  const std::string prompt = build_annotation_prompt(rec, map);
  auto delay = cfg.backoff_initial;
  std::string last_error;
  const int attempts = std::max(1, cfg.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      Annotation a = parse_annotation(client.complete(prompt));
      return Quadruple{rec.id, rec.transcript, std::move(a.tags),
                       facs::au_to_blendshapes(a.aus, map), std::move(a.situation)};
    } catch (const TransportError& e) {
      last_error = std::string("transport: ") + e.what();
    } catch (const MalformedResponse& e) {
      last_error = std::string("malformed response: ") + e.what();
    }
    if (cfg.log)
      cfg.log("record " + rec.id + " attempt " + std::to_string(attempt) + "/" +
              std::to_string(attempts) + " failed: " + last_error);
    if (attempt < attempts && client.wants_backoff() && delay.count() > 0) {
      std::this_thread::sleep_for(delay);
      delay = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(delay.count()) * cfg.backoff_multiplier));
    }
  }
  if (cfg.log) cfg.log("record " + rec.id + " skipped: " + last_error);
  return SkippedRecord{rec.id, last_error};
}

}  // namespace

AnnotateSummary annotate_corpus(const std::vector<CorpusRecord>& records, AnnotationClient& client,
                                const facs::AUBlendshapeMap& map, const AnnotateConfig& cfg,
                                const std::function<void(Quadruple)>& sink) {
  AnnotateSummary summary;
  auto emit = [&](Outcome&& o) {
    if (auto* q = std::get_if<Quadruple>(&o)) {
      ++summary.produced;
      sink(std::move(*q));
    } else {
      summary.skipped.push_back(std::get<SkippedRecord>(std::move(o)));
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(records.size(), static_cast<std::size_t>(std::max(1, cfg.concurrency)));
  if (workers <= 1) {
    for (const auto& rec : records) emit(annotate_one(rec, client, map, cfg));
    return summary;
  }

  // Workers claim record indices; the calling thread emits the finished
  // prefix in input order so output is deterministic.
  std::vector<std::optional<Outcome>> done(records.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < records.size(); i = next++) {
        Outcome o = annotate_one(records[i], client, map, cfg);
        {
          std::lock_guard lock(mu);
          done[i] = std::move(o);
        }
        cv.notify_one();
      }
    });
  }
  try {
    for (std::size_t i = 0; i < records.size(); ++i) {
      Outcome o;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return done[i].has_value(); });
        o = std::move(*done[i]);
        done[i].reset();
      }
      emit(std::move(o));
    }
  } catch (...) {
    next = records.size();
    for (auto& t : pool) t.join();
    throw;
  }
  for (auto& t : pool) t.join();
  return summary;
}

std::vector<Quadruple> annotate_corpus(const std::vector<CorpusRecord>& records,
                                       AnnotationClient& client, const facs::AUBlendshapeMap& map,
                                       const AnnotateConfig& cfg, AnnotateSummary* summary) {
  std::vector<Quadruple> out;
  auto s = annotate_corpus(records, client, map, cfg, [&](Quadruple q) { out.push_back(std::move(q)); });
  if (summary) *summary = std::move(s);
  return out;
}

}  // namespace emoface::tead

#include <cstdlib>
#include <memory>

#include "emoface/common/config.hpp"
#include "emoface/tead/annotate.hpp"
#include "emoface/tead/client.hpp"
#include "support.hpp"

namespace emoface::cli {

namespace {

struct BuildOptions {
  std::string corpus;
  std::string out;
  std::optional<std::string> fixtures;
  std::optional<std::string> au_map;
  ConfigOptions config;
};

void run_build(const Context& ctx, const BuildOptions& o) {
  auto cfg = o.config.resolve();
  if (o.fixtures) set_config_path(cfg, "annotation.fixtures", *o.fixtures);
  const auto* fixtures = find_config_path(cfg, "annotation.fixtures");
  const auto* endpoint = find_config_path(cfg, "annotation.endpoint");
  if (!!fixtures == !!endpoint)
    throw UsageError("give exactly one annotation source: --fixtures/annotation.fixtures or annotation.endpoint");

  std::optional<facs::AUBlendshapeMap> loaded;
  if (o.au_map) loaded = facs::AUBlendshapeMap::load(*o.au_map);
  const auto& map = loaded ? *loaded : facs::AUBlendshapeMap::builtin();

  std::unique_ptr<tead::AnnotationClient> client;
  if (fixtures) {
    if (!fs::is_directory(fixtures->get<std::string>()))
      throw IoError("fixture directory not found: " + fixtures->get<std::string>());
    client = std::make_unique<tead::FixtureClient>(fixtures->get<std::string>());
  } else {
    tead::HttpClientConfig h;
    h.endpoint = endpoint->get<std::string>();
    h.model = require_string(cfg, "annotation.model");
    const auto key_env = config_value<std::string>(cfg, "annotation.api_key_env", "EMOFACE_API_KEY");
    if (const char* key = std::getenv(key_env.c_str())) h.api_key = key;
    h.temperature = config_value<double>(cfg, "annotation.temperature", h.temperature);
    h.timeout_seconds = config_value<int>(cfg, "annotation.timeout_seconds", h.timeout_seconds);
    h.requests_per_minute = config_value<double>(cfg, "annotation.requests_per_minute", h.requests_per_minute);
    client = std::make_unique<tead::HttpChatClient>(h);
  }

  tead::AnnotateConfig ac;
  ac.max_attempts = config_value<int>(cfg, "annotation.max_attempts", ac.max_attempts);
  ac.backoff_initial = std::chrono::milliseconds(
      config_value<long>(cfg, "annotation.backoff_ms", static_cast<long>(ac.backoff_initial.count())));
  ac.backoff_multiplier = config_value<double>(cfg, "annotation.backoff_multiplier", ac.backoff_multiplier);
  ac.concurrency = config_value<int>(cfg, "annotation.concurrency", ac.concurrency);
  if (ac.max_attempts < 1 || ac.concurrency < 1) throw InvalidArgument("attempts and concurrency must be >= 1");
  ac.log = [&ctx](std::string_view line) { ctx.err << line << "\n"; };

  const auto records = tead::load_corpus(o.corpus);
  tead::TEADStore store;
  tead::AnnotateSummary summary;
  const auto quads = tead::annotate_corpus(records, *client, map, ac, &summary);
  for (auto q : quads) store.add(std::move(q));
  const fs::path out = o.out;
  ensure_parent(out);
  store.save(out);

  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : summary.skipped) skipped.push_back({{"id", s.id}, {"reason", s.reason}});
  write_sidecar(ctx, out, "tead build", cfg, global_seed(cfg),
                {{"corpus", o.corpus}, {"client", client->name()}, {"produced", summary.produced},
                 {"skipped", skipped}});
  ctx.out << "annotated " << records.size() << " transcripts: " << summary.produced << " quadruples, "
          << summary.skipped.size() << " skipped\n";
  for (const auto& s : summary.skipped) ctx.out << "  skipped " << s.id << ": " << s.reason << "\n";
}

struct SplitOptions {
  std::string store;
  double fraction = 0.9;
  std::uint64_t seed = 0;
  std::string out_dir;
};

void run_split(const Context& ctx, const SplitOptions& o) {
  const auto store = tead::TEADStore::load(o.store, o.seed);
  const auto split = tead::split_dataset(store, o.fraction);
  if (split.warning) ctx.err << "warning: " << *split.warning << "\n";
  const fs::path dir = o.out_dir;
  write_lines(dir / "train_ids.txt", split.train);
  write_lines(dir / "test_ids.txt", split.test);
  const nlohmann::json cfg = {{"store", o.store}, {"fraction", o.fraction}, {"seed", o.seed}};
  write_sidecar(ctx, dir / "train_ids.txt", "tead split", cfg, o.seed);
  write_sidecar(ctx, dir / "test_ids.txt", "tead split", cfg, o.seed);
  ctx.out << "split " << store.size() << " records: " << split.train.size() << " train, "
          << split.test.size() << " test\n";
}

}  // namespace

void add_tead_commands(CLI::App& app, Context& ctx) {
  auto* tead = app.add_subcommand("tead", "Text-expression dataset construction");
  tead->require_subcommand(1);

  auto b = std::make_shared<BuildOptions>();
  auto* build = tead->add_subcommand("build", "Annotate a transcript corpus into a JSONL store");
  build->add_option("--corpus", b->corpus, "Corpus: JSONL {id, text} or one transcript per line")->required();
  build->add_option("--out", b->out, "Output store (JSONL)")->required();
  build->add_option("--fixtures", b->fixtures, "Offline reply directory (overrides the config)");
  build->add_option("--au-map", b->au_map, "AU to blendshape table CSV (default: built in)");
  add_config_options(*build, b->config, false);
  build->callback([&ctx, b] { run_build(ctx, *b); });

  auto path = std::make_shared<std::string>();
  auto* validate = tead->add_subcommand("validate", "Check every record of a store");
  validate->add_option("store", *path, "Store (JSONL)")->required();
  validate->callback([&ctx, path] {
    const auto store = tead::TEADStore::load(*path);
    ctx.out << "ok: " << store.size() << " valid records\n";
  });

  auto s = std::make_shared<SplitOptions>();
  auto* split = tead->add_subcommand("split", "Seeded train/test split into id lists");
  split->add_option("store", s->store, "Store (JSONL)")->required();
  split->add_option("--fraction", s->fraction, "Train fraction, 0 < f < 1");
  split->add_option("--seed", s->seed, "Split seed");
  split->add_option("--out-dir", s->out_dir, "Directory for train_ids.txt and test_ids.txt")->required();
  split->callback([&ctx, s] { run_split(ctx, *s); });
}

}  // namespace emoface::cli

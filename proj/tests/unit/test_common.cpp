#include <filesystem>

#include <gtest/gtest.h>

#include "emoface/common/config.hpp"
#include "emoface/common/error.hpp"
#include "emoface/common/rng.hpp"
#include "emoface/common/text.hpp"
#include "emoface/common/toml.hpp"

namespace emoface {
namespace {

TEST(Toml, TablesKeysAndValues) {
  const auto j = parse_toml(R"(
seed = 3
name = "toy"   # trailing comment
[train]
lr = 1e-3
enabled = true
ops = ["a", 'b',
       "c"]
[model.pooling]
heads = 2
dotted.key = -4
)");
  EXPECT_EQ(j.at("seed"), 3);
  EXPECT_EQ(j.at("name"), "toy");
  EXPECT_DOUBLE_EQ(j.at("train").at("lr").get<double>(), 1e-3);
  EXPECT_EQ(j.at("train").at("enabled"), true);
  EXPECT_EQ(j.at("train").at("ops"), nlohmann::json({"a", "b", "c"}));
  EXPECT_EQ(j.at("model").at("pooling").at("heads"), 2);
  EXPECT_EQ(j.at("model").at("pooling").at("dotted").at("key"), -4);
}

TEST(Toml, MalformedInputNamesLine) {
  try {
    parse_toml("a = 1\nb = \n");
    FAIL() << "expected a parse error";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_toml("x = {a = 1}\n"), InvalidArgument);
  EXPECT_THROW(parse_toml("a = 1\na = 2\n"), InvalidArgument);
}

TEST(Toml, ShippedConfigsParse) {
  const std::filesystem::path dir = std::filesystem::path(EMOFACE_SOURCE_DIR) / "configs";
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".toml") continue;
    EXPECT_NO_THROW(load_config_file(e.path())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 3u);
}

TEST(Config, MergeSetFindAndHash) {
  nlohmann::json base = {{"a", {{"b", 1}, {"c", 2}}}, {"d", 3}};
  merge_config(base, {{"a", {{"b", 10}}}, {"e", 5}});
  EXPECT_EQ(base.at("a").at("b"), 10);
  EXPECT_EQ(base.at("a").at("c"), 2);
  EXPECT_EQ(base.at("e"), 5);
  set_config_path(base, "x.y.z", "v");
  ASSERT_NE(find_config_path(base, "x.y.z"), nullptr);
  EXPECT_EQ(*find_config_path(base, "x.y.z"), "v");
  EXPECT_EQ(find_config_path(base, "x.q"), nullptr);
  EXPECT_EQ(config_value(base, "a.c", 0), 2);
  EXPECT_EQ(config_value(base, "missing", 7), 7);
  EXPECT_THROW(config_value<int>(base, "x.y.z", 0), InvalidArgument);

  // Key order does not change the hash; values do.
  const nlohmann::json p = {{"a", 1}, {"b", 2}};
  const nlohmann::json q = nlohmann::json::parse(R"({"b": 2, "a": 1})");
  EXPECT_EQ(config_hash(p), config_hash(q));
  EXPECT_NE(config_hash(p), config_hash({{"a", 1}, {"b", 3}}));
}

TEST(Text, Helpers) {
  EXPECT_EQ(trim("  hi \n"), "hi");
  EXPECT_EQ(to_lower("HeLLo"), "hello");
  EXPECT_EQ(split_whitespace(" a  b\tc "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(join({"a", "b"}, ", "), "a, b");
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Rng, SaveRestoreContinuesStream) {
  Rng a(42);
  a.uniform();
  const auto s = a.save();
  const double next = a.uniform();
  Rng b(0);
  b.restore(s);
  EXPECT_EQ(b.uniform(), next);
  EXPECT_NE(Rng::derive_seed(1, 0), Rng::derive_seed(1, 1));
  EXPECT_EQ(Rng::derive_seed(1, 2), Rng::derive_seed(1, 2));
}

}  // namespace
}  // namespace emoface

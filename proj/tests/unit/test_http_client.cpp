#include <atomic>
#include <chrono>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "emoface/common/error.hpp"
#include "emoface/tead/annotate.hpp"
#include "emoface/tead/client.hpp"
#include "emoface/tead/prompt.hpp"

namespace emoface::tead {
namespace {

// A local chat-completion endpoint. The first `fail_first` requests get a 503.
class FakeProvider {
 public:
  explicit FakeProvider(int fail_first = 0) : fail_first_(fail_first) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      const auto body = nlohmann::json::parse(req.body);
      last_model_ = body.at("model").get<std::string>();
      last_prompt_ = body.at("messages").at(0).at("content").get<std::string>();
      if (calls_++ < fail_first_) {
        res.status = 503;
        return;
      }
      nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply_}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeProvider() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

  std::string reply_ = "hello";
  std::atomic<int> calls_{0};
  std::string last_auth_, last_model_, last_prompt_;

 private:
  int fail_first_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

HttpClientConfig config_for(const FakeProvider& p) {
  HttpClientConfig c;
  c.endpoint = p.endpoint();
  c.model = "test-model";
  c.api_key = "k-123";
  c.timeout_seconds = 5;
  return c;
}

TEST(HttpChatClient, SendsChatRequestAndReadsContent) {
  FakeProvider p;
  HttpChatClient client(config_for(p));
  EXPECT_EQ(client.complete("describe this"), "hello");
  EXPECT_EQ(p.last_prompt_, "describe this");
  EXPECT_EQ(p.last_model_, "test-model");
  EXPECT_EQ(p.last_auth_, "Bearer k-123");
}

TEST(HttpChatClient, ServerErrorIsTransportError) {
  FakeProvider p(1);
  HttpChatClient client(config_for(p));
  EXPECT_THROW(client.complete("x"), TransportError);
  EXPECT_EQ(client.complete("x"), "hello");
}

TEST(HttpChatClient, UnreachableEndpointIsTransportError) {
  HttpClientConfig c;
  c.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  c.model = "m";
  c.timeout_seconds = 2;
  HttpChatClient client(c);
  EXPECT_THROW(client.complete("x"), TransportError);
}

TEST(HttpChatClient, RejectsRelativeEndpointAndEmptyModel) {
  HttpClientConfig c;
  c.endpoint = "/v1/chat";
  c.model = "m";
  EXPECT_THROW(HttpChatClient{c}, InvalidArgument);
  c.endpoint = "http://localhost/v1";
  c.model = "";
  EXPECT_THROW(HttpChatClient{c}, InvalidArgument);
}

TEST(HttpChatClient, RateLimitSpacesRequests) {
  FakeProvider p;
  auto cfg = config_for(p);
  cfg.requests_per_minute = 600.0;  // one every 100 ms
  HttpChatClient client(cfg);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) client.complete("x");
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(290));
}

TEST(HttpChatClient, AnnotationRetriesThroughBackoff) {
  FakeProvider p(2);
  const auto ann = Annotation::make({"happy", "joy", "warm"}, {}, "A friend visits.");
  p.reply_ = format_annotation_response(ann);
  HttpChatClient client(config_for(p));
  AnnotateConfig cfg;
  cfg.max_attempts = 3;
  cfg.backoff_initial = std::chrono::milliseconds(1);
  const auto out = annotate_corpus({CorpusRecord::make("a", "What a day!")}, client,
                                   facs::AUBlendshapeMap::builtin(), cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].tags, ann.tags);
  EXPECT_EQ(p.calls_, 3);
}

}  // namespace
}  // namespace emoface::tead

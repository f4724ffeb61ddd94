#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

namespace emoface::tead {

/// Something that turns an annotation prompt into a raw reply.
/// Implementations throw TransportError for failures worth retrying.
class AnnotationClient {
 public:
  virtual ~AnnotationClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string name() const = 0;
  /// Whether retries should wait between attempts.
  virtual bool wants_backoff() const { return true; }
};

/// Offline provider: replies are files `<dir>/<request_key(prompt)>.txt`.
class FixtureClient : public AnnotationClient {
 public:
  explicit FixtureClient(std::filesystem::path dir);
  std::string complete(const std::string& prompt) override;
  std::string name() const override { return "fixtures:" + dir_.string(); }
  bool wants_backoff() const override { return false; }

  /// Stable file key for a prompt: hex FNV-1a of its bytes.
  static std::string request_key(const std::string& prompt);
  /// Writes a reply so that complete(prompt) returns it.
  static void write_fixture(const std::filesystem::path& dir, const std::string& prompt,
                            const std::string& reply);

 private:
  std::filesystem::path dir_;
};

struct HttpClientConfig {
  /// Full URL of an OpenAI-style chat-completions endpoint, e.g.
  /// https://api.openai.com/v1/chat/completions
  std::string endpoint;
  std::string model;
  std::string api_key;  // sent as a Bearer token when non-empty
  double temperature = 0.0;
  int timeout_seconds = 60;
  /// Minimum spacing between request starts; <= 0 disables rate limiting.
  double requests_per_minute = 0.0;
};

/// Live provider speaking the generic chat-completion JSON protocol:
/// POST {"model", "temperature", "messages": [{"role": "user", "content"}]}
/// and read choices[0].message.content. Safe to call from several threads.
class HttpChatClient : public AnnotationClient {
 public:
  explicit HttpChatClient(HttpClientConfig cfg);
  std::string complete(const std::string& prompt) override;
  std::string name() const override { return "http:" + cfg_.endpoint; }

 private:
  void wait_for_slot();

  HttpClientConfig cfg_;
  std::string scheme_host_port_;
  std::string path_;
  std::mutex rate_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
};

}  // namespace emoface::tead

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "emoface/common/error.hpp"
#include "emoface/tead/client.hpp"

namespace emoface::tead {

HttpChatClient::HttpChatClient(HttpClientConfig cfg) : cfg_(std::move(cfg)) {
  const auto& url = cfg_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("endpoint must be an absolute URL");
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (cfg_.model.empty()) throw InvalidArgument("annotation model name is empty");
}

void HttpChatClient::wait_for_slot() {
  if (cfg_.requests_per_minute <= 0.0) return;
  const auto spacing = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(60.0 / cfg_.requests_per_minute));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(rate_mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + spacing;
  }
  std::this_thread::sleep_until(slot);
}

std::string HttpChatClient::complete(const std::string& prompt) {
  wait_for_slot();
  nlohmann::json body = {
      {"model", cfg_.model},
      {"temperature", cfg_.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};

  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(cfg_.timeout_seconds, 0);
  client.set_read_timeout(cfg_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransportError("provider returned HTTP " + std::to_string(res->status));
  if (res->status != 200)
    throw TransportError("provider returned HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200));
  try {
    auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected provider payload: ") + e.what());
  }
}

}  // namespace emoface::tead

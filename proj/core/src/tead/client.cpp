#include "emoface/tead/client.hpp"

#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"

namespace emoface::tead {

FixtureClient::FixtureClient(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_))
    throw IoError("fixture directory not found: " + dir_.string());
}

std::string FixtureClient::request_key(const std::string& prompt) { return hex64(fnv1a64(prompt)); }

std::string FixtureClient::complete(const std::string& prompt) {
  const auto path = dir_ / (request_key(prompt) + ".txt");
  if (!std::filesystem::exists(path))
    throw TransportError("no fixture for request " + request_key(prompt));
  return read_file(path);
}

void FixtureClient::write_fixture(const std::filesystem::path& dir, const std::string& prompt,
                                  const std::string& reply) {
  write_file(dir / (request_key(prompt) + ".txt"), reply);
}

}  // namespace emoface::tead

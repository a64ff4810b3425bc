#include "clarity/llm_client.hpp"

#include <cstdlib>
#include <stdexcept>

#include "clarity/util.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace clarity {

CachedLlmClient::CachedLlmClient(std::shared_ptr<LlmClient> inner,
                                 std::filesystem::path cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
  std::filesystem::create_directories(cache_dir_);
}

std::string CachedLlmClient::cache_key(const std::string& kind,
                                       const std::string& prompt) const {
  const char sep = '\x1f';
  return sha256_hex(kind + sep + prompt + sep + inner_->provider_tag());
}

std::filesystem::path CachedLlmClient::entry_path(const std::string& key) const {
  return cache_dir_ / (key + ".json");
}

std::string CachedLlmClient::complete(const std::string& kind, const std::string& prompt) {
  const std::filesystem::path path = entry_path(cache_key(kind, prompt));
  if (std::filesystem::exists(path)) {
    try {
      json entry = json::parse(read_file(path));
      std::string response = entry.at("response").get<std::string>();
      ++hits_;
      return response;
    } catch (const json::exception& e) {
      throw std::runtime_error("corrupt cache entry " + path.string() + ": " + e.what());
    }
  }
  std::string response = inner_->complete(kind, prompt);
  json entry{{"prompt", prompt},
             {"response", response},
             {"provider_tag", inner_->provider_tag()},
             {"created_at", utc_timestamp()}};
  atomic_write_file(path, entry.dump(2) + "\n");
  ++misses_;
  return response;
}

void CachedLlmClient::invalidate(const std::string& kind, const std::string& prompt) {
  std::error_code ec;
  std::filesystem::remove(entry_path(cache_key(kind, prompt)), ec);
}

namespace {

// Extracts the slot between fixed markers; empty optional when absent.
std::optional<std::string> between(const std::string& text, const std::string& open,
                                   const std::string& close) {
  std::size_t a = text.find(open);
  if (a == std::string::npos) return std::nullopt;
  a += open.size();
  std::size_t b = text.find(close, a);
  if (b == std::string::npos) return std::nullopt;
  return text.substr(a, b - a);
}

}  // namespace

std::string StubLlmClient::complete(const std::string& kind, const std::string& prompt) {
  ++calls_;
  if (auto it = table_.find(prompt); it != table_.end()) return it->second;
  if (kind == "rationale_two_step") {
    auto moral = between(prompt, "Action 1: ", " and Action 2:");
    std::size_t at = prompt.find(" and Action 2: ");
    if (moral && at != std::string::npos) {
      std::size_t from = at + std::string(" and Action 2: ").size();
      std::size_t end = prompt.find('\n', from);
      std::string immoral =
          prompt.substr(from, end == std::string::npos ? std::string::npos : end - from);
      return "Moral rationale: It is good that " + *moral +
             " Immoral rationale: It is bad that " + immoral;
    }
  }
  if (prompt.find("Answer choice:") != std::string::npos) {
    // Deterministic split keyed on content, so grading sees both labels.
    std::uint64_t h = std::stoull(sha256_hex(prompt).substr(0, 8), nullptr, 16);
    return h % 2 == 0 ? "a) yes" : "b) no";
  }
  return fallback_;
}

void StubLlmClient::set_response(const std::string& prompt, const std::string& response) {
  table_[prompt] = response;
}

HttpLlmClient::HttpLlmClient(HttpLlmOptions options) : options_(std::move(options)) {
  const char* key = std::getenv(options_.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw UsageError("environment variable " + options_.api_key_env +
                     " is not set (required for the HTTP client)");
  api_key_ = key;
}

std::string HttpLlmClient::provider_tag() const { return "openai:" + options_.model; }

std::string HttpLlmClient::complete(const std::string& kind, const std::string& prompt) {
  (void)kind;
  httplib::Client client(options_.base_url);
  client.set_connection_timeout(options_.timeout_seconds);
  client.set_read_timeout(options_.timeout_seconds);
  client.set_bearer_token_auth(api_key_);

  json body{{"model", options_.model},
            {"temperature", options_.temperature},
            {"max_tokens", options_.max_tokens},
            {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})}};
  auto res = client.Post(options_.chat_path, body.dump(), "application/json");
  if (!res)
    throw TransportError("request to " + options_.base_url +
                         " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError("request to " + options_.base_url + " returned status " +
                         std::to_string(res->status) + ": " + res->body);
  json reply = json::parse(res->body);
  const json& choices = reply.at("choices");
  if (!choices.is_array() || choices.empty())
    throw TransportError("response has no choices");
  return choices.at(0).at("message").at("content").get<std::string>();
}

}  // namespace clarity

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace clarity {

/// Minimal completion interface: one prompt in, one text response out.
/// provider_tag identifies the backing model for cache partitioning.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& kind, const std::string& prompt) = 0;
  virtual std::string provider_tag() const = 0;
};

/// Content-addressed response cache: one JSON file per (kind, prompt,
/// provider) key. A hit never touches the wrapped client.
class CachedLlmClient : public LlmClient {
 public:
  CachedLlmClient(std::shared_ptr<LlmClient> inner, std::filesystem::path cache_dir);

  std::string complete(const std::string& kind, const std::string& prompt) override;
  std::string provider_tag() const override { return inner_->provider_tag(); }

  /// Drops the cached entry for one key so a retry reaches the client.
  void invalidate(const std::string& kind, const std::string& prompt);

  std::string cache_key(const std::string& kind, const std::string& prompt) const;
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  std::filesystem::path entry_path(const std::string& key) const;

  std::shared_ptr<LlmClient> inner_;
  std::filesystem::path cache_dir_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

/// Deterministic offline stand-in. Modes, in priority order:
///  1. exact-prompt table entries,
///  2. curation prompts answered with rationales derived from the action texts,
///  3. choice prompts answered "a) yes" / "b) no" by prompt-hash parity,
///  4. the fixed fallback response.
class StubLlmClient : public LlmClient {
 public:
  std::string complete(const std::string& kind, const std::string& prompt) override;
  std::string provider_tag() const override { return "stub"; }

  void set_response(const std::string& prompt, const std::string& response);
  void set_fallback(std::string response) { fallback_ = std::move(response); }
  std::uint64_t calls() const { return calls_; }

 private:
  std::map<std::string, std::string> table_;
  std::string fallback_ = "a) yes";
  std::atomic<std::uint64_t> calls_{0};
};

struct HttpLlmOptions {
  std::string base_url = "https://api.openai.com";
  std::string chat_path = "/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  /// Name of the environment variable holding the API key. The key itself is
  /// never stored in configuration.
  std::string api_key_env = "LLM_API_KEY";
  double temperature = 0.0;
  int max_tokens = 512;
  int timeout_seconds = 60;
};

/// OpenAI-style chat completions over HTTPS. Throws TransportError on network
/// or protocol failure.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(HttpLlmOptions options);

  std::string complete(const std::string& kind, const std::string& prompt) override;
  std::string provider_tag() const override;

 private:
  HttpLlmOptions options_;
  std::string api_key_;
};

}  // namespace clarity

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace clarity {

using json = nlohmann::json;

/// Bad invocation or configuration. The CLI maps this to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A failed call against a remote completion endpoint.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view text, std::string_view prefix);

/// Whitespace-separated tokens (the tokenizer used for model inputs and word caps).
std::vector<std::string> split_words(std::string_view text);
std::string join_words(const std::vector<std::string>& words);

/// Keeps at most `max_words` whitespace tokens of `text`.
std::string truncate_words(std::string_view text, std::size_t max_words);

std::string sha256_hex(std::string_view bytes);
std::string utc_timestamp();

std::string read_file(const std::filesystem::path& path);
/// Write-temp-then-rename so concurrent readers never observe partial files.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::vector<json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

/// Minimal RFC-4180 row reader (quoted fields, embedded commas and quotes).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

/// Timestamped notice on stderr; keeps stdout clean for command output.
void log_info(const std::string& message);

}  // namespace clarity

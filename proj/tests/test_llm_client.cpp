#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <memory>

#include "clarity/llm_client.hpp"
#include "clarity/prompts.hpp"
#include "clarity/util.hpp"
#include "test_support.hpp"

using namespace clarity;

TEST_CASE("cache serves repeats without touching the inner client") {
  testsupport::TempDir tmp("llm-cache");
  auto stub = std::make_shared<StubLlmClient>();
  CachedLlmClient client(stub, tmp.path());

  std::string first = client.complete("zero_shot_judgment", "Given an action: x. Is it moral or not?\nAnswer choice: a) yes b) no.");
  std::string second = client.complete("zero_shot_judgment", "Given an action: x. Is it moral or not?\nAnswer choice: a) yes b) no.");
  CHECK(first == second);
  CHECK(stub->calls() == 1);
  CHECK(client.misses() == 1);
  CHECK(client.hits() == 1);
}

TEST_CASE("cache key covers kind, prompt, and provider tag") {
  testsupport::TempDir tmp("llm-key");
  auto stub = std::make_shared<StubLlmClient>();
  CachedLlmClient client(stub, tmp.path());

  const char sep = '\x1f';
  std::string expect = sha256_hex(std::string("claritycot") + sep + "p" + sep + "stub");
  CHECK(client.cache_key("claritycot", "p") == expect);
  // Any component change moves the key.
  CHECK(client.cache_key("zero_shot_judgment", "p") != expect);
  CHECK(client.cache_key("claritycot", "q") != expect);

  client.complete("claritycot", "p");
  client.complete("zero_shot_judgment", "p");
  CHECK(client.misses() == 2);
  CHECK(stub->calls() == 2);
}

TEST_CASE("invalidate forces a fresh completion") {
  testsupport::TempDir tmp("llm-inv");
  auto stub = std::make_shared<StubLlmClient>();
  stub->set_fallback("first");
  CachedLlmClient client(stub, tmp.path());

  CHECK(client.complete("norm_generation_baseline", "give me a norm") == "first");
  stub->set_fallback("second");
  CHECK(client.complete("norm_generation_baseline", "give me a norm") == "first");
  client.invalidate("norm_generation_baseline", "give me a norm");
  CHECK(client.complete("norm_generation_baseline", "give me a norm") == "second");
  CHECK(stub->calls() == 2);
}

TEST_CASE("corrupt cache entries fail fast with the file named") {
  testsupport::TempDir tmp("llm-corrupt");
  auto stub = std::make_shared<StubLlmClient>();
  CachedLlmClient client(stub, tmp.path());
  client.complete("claritycot", "p");

  auto entry = tmp.path() / (client.cache_key("claritycot", "p") + ".json");
  REQUIRE(std::filesystem::exists(entry));
  std::ofstream(entry) << "{not json";
  CHECK_THROWS_WITH_AS(client.complete("claritycot", "p"),
                       doctest::Contains("corrupt cache entry"), std::runtime_error);
}

TEST_CASE("cache entries persist across client instances") {
  testsupport::TempDir tmp("llm-persist");
  auto stub = std::make_shared<StubLlmClient>();
  stub->set_fallback("kept");
  {
    CachedLlmClient first(stub, tmp.path());
    first.complete("norm_generation_baseline", "anything");
  }
  stub->set_fallback("changed");
  CachedLlmClient second(stub, tmp.path());
  CHECK(second.complete("norm_generation_baseline", "anything") == "kept");
  CHECK(stub->calls() == 1);
}

TEST_CASE("stub answers curation prompts from the action texts") {
  StubLlmClient stub;
  std::string prompt = prompts::rationale_curation("norm", "tom paid", "tom stole");
  std::string response = stub.complete("rationale_two_step", prompt);
  auto pair = parse_rationale_response(response);
  REQUIRE(pair.has_value());
  CHECK(pair->moral_rationale.find("tom paid") != std::string::npos);
  CHECK(pair->immoral_rationale.find("tom stole") != std::string::npos);
}

TEST_CASE("stub choice answers are deterministic and parse cleanly") {
  StubLlmClient stub;
  std::string a = stub.complete("claritycot", prompts::claritycot("act one"));
  std::string b = stub.complete("claritycot", prompts::claritycot("act one"));
  CHECK(a == b);
  auto verdict = parse_choice(a);
  REQUIRE(verdict.has_value());
  CHECK((*verdict == 0 || *verdict == 1));
}

TEST_CASE("stub exact-prompt table wins over derived answers") {
  StubLlmClient stub;
  stub.set_response("exact", "canned");
  CHECK(stub.complete("claritycot", "exact") == "canned");
}

TEST_CASE("http client requires the configured key variable") {
  HttpLlmOptions opts;
  opts.api_key_env = "CLARITY_TEST_KEY_THAT_IS_UNSET";
  ::unsetenv(opts.api_key_env.c_str());
  CHECK_THROWS_WITH_AS(HttpLlmClient{opts},
                       doctest::Contains("CLARITY_TEST_KEY_THAT_IS_UNSET"), UsageError);

  ::setenv(opts.api_key_env.c_str(), "sk-test", 1);
  HttpLlmClient client{opts};
  CHECK(client.provider_tag() == "openai:gpt-3.5-turbo");
  ::unsetenv(opts.api_key_env.c_str());
}

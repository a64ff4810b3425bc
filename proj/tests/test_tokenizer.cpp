#include <doctest.h>

#include "clarity/tokenizer.hpp"

using namespace clarity;

TEST_CASE("vocab reserves special ids and encodes whitespace tokens") {
  Vocab v = Vocab::build({"the cat sat", "the dog"});
  CHECK(v.id_of("<pad>") == Vocab::kPad);
  CHECK(v.id_of("<bos>") == Vocab::kBos);
  CHECK(v.id_of("<eos>") == Vocab::kEos);
  CHECK(v.id_of("<unk>") == Vocab::kUnk);
  CHECK(v.size() == 4 + 4);  // cat, dog, sat, the

  TokenSeq ids = v.encode("the cat flew");
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] == v.id_of("the"));
  CHECK(ids[1] == v.id_of("cat"));
  CHECK(ids[2] == Vocab::kUnk);  // unseen word
}

TEST_CASE("decode skips pad bos eos but keeps unk visible") {
  Vocab v = Vocab::build({"a b"});
  TokenSeq ids = {Vocab::kBos, v.id_of("a"), Vocab::kPad, v.id_of("b"), Vocab::kUnk,
                  Vocab::kEos};
  CHECK(v.decode(ids) == "a b <unk>");
}

TEST_CASE("encode decode round trip for known words") {
  Vocab v = Vocab::build({"alpha beta gamma delta"});
  std::string text = "gamma alpha delta";
  CHECK(v.decode(v.encode(text)) == text);
}

TEST_CASE("words and from_words round trip preserves every id") {
  Vocab v = Vocab::build({"one two three"});
  Vocab w = Vocab::from_words(v.words());
  REQUIRE(w.size() == v.size());
  for (TokenId id = 0; id < static_cast<TokenId>(v.size()); ++id) {
    CHECK(w.word_of(id) == v.word_of(id));
  }
  CHECK_THROWS(Vocab::from_words({"missing", "specials"}));
}

TEST_CASE("absorb keeps existing ids stable") {
  Vocab v = Vocab::build({"aa bb"});
  TokenId aa = v.id_of("aa");
  v.absorb("cc aa dd");
  CHECK(v.id_of("aa") == aa);
  CHECK(v.id_of("cc") != Vocab::kUnk);
  CHECK(v.id_of("dd") != Vocab::kUnk);
}

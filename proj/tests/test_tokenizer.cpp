#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "slp/corpus.hpp"
#include "slp/rng.hpp"
#include "slp/tokenizer.hpp"

using namespace slp;

TEST_CASE("normalization lowercases and collapses whitespace") {
  CHECK(normalize_text("  Turn  ON\tthe Lights \n") == "turn on the lights");
  CHECK(normalize_text("") == "");
}

TEST_CASE("specials occupy the lowest ids in fixed order") {
  const Vocabulary v = train_vocab({"on on on"}, 16, 1);
  CHECK(v.tokens[Vocabulary::kPad] == "[PAD]");
  CHECK(v.tokens[Vocabulary::kUnk] == "[UNK]");
  CHECK(v.tokens[Vocabulary::kBos] == "[BOS]");
  CHECK(v.tokens[Vocabulary::kSep] == "[SEP]");
  CHECK(v.tokens[Vocabulary::kEos] == "[EOS]");
  CHECK(v.tokens[Vocabulary::kMask] == "[MASK]");
  CHECK(v.tokens[Vocabulary::kSlu] == "[SLU]");
}

TEST_CASE("dominant word merges into a whole-word token") {
  const Vocabulary v = train_vocab({"on on on"}, 16, 1);
  CHECK(v.id_of("on") >= Vocabulary::kNumSpecials);
}

TEST_CASE("empty corpus is rejected") {
  CHECK_THROWS(train_vocab({}, 64, 1));
  CHECK_THROWS(train_vocab({"   "}, 64, 1));
}

TEST_CASE("target size below base inventory is rejected") {
  CHECK_THROWS(train_vocab({"abcdefgh"}, 8, 1));
}

TEST_CASE("tokenize: empty text, whole-word hits, greedy continuation split") {
  const Vocabulary v = train_vocab({"light lights lighting on"}, 64, 1);
  CHECK(tokenize("", v).empty());

  const std::vector<int> whole = tokenize("light", v);
  REQUIRE(whole.size() == 1);
  CHECK(v.token(whole[0]) == "light");
}

TEST_CASE("greedy longest-match picks light + ##s") {
  Vocabulary v;
  for (const std::string& s : Vocabulary::special_strings()) {
    v.index[s] = v.size();
    v.tokens.push_back(s);
  }
  for (const std::string& s : {"light", "##s", "l", "##i", "##g", "##h", "##t"}) {
    v.index[s] = v.size();
    v.tokens.push_back(s);
  }
  const std::vector<int> ids = tokenize("lights", v);
  REQUIRE(ids.size() == 2);
  CHECK(v.token(ids[0]) == "light");
  CHECK(v.token(ids[1]) == "##s");
  CHECK(detokenize(ids, v) == "lights");
}

TEST_CASE("unsegmentable words fall back to [UNK] and specials are never emitted") {
  const Vocabulary v = train_vocab({"aa bb"}, 16, 1);
  const std::vector<int> ids = tokenize("zz [mask]", v);
  for (int id : ids) CHECK(id == Vocabulary::kUnk);
}

TEST_CASE("detokenize: continuation fusion, empty input, pad dropped") {
  const Vocabulary v = train_vocab({"ab"}, 16, 1);
  CHECK(detokenize({}, v) == "");
  CHECK(detokenize({Vocabulary::kPad}, v) == "");
  CHECK(detokenize({Vocabulary::kEos}, v) == "[EOS]");
  CHECK_THROWS(detokenize({v.size()}, v));
}

TEST_CASE("round-trip over a generated corpus") {
  const TemplateGrammar grammar = fsc_like_grammar();
  Rng rng(12);
  std::vector<std::string> corpus;
  for (int i = 0; i < 200; ++i) {
    const Template& tpl = grammar.templates[rng.below(grammar.templates.size())];
    corpus.push_back(instantiate(grammar, tpl, rng).transcript);
  }
  const Vocabulary v = train_vocab(corpus, 512, 1);
  for (const std::string& line : corpus) {
    const std::vector<int> ids = tokenize(line, v);
    for (int id : ids) CHECK(id != Vocabulary::kUnk);
    CHECK(detokenize(ids, v) == normalize_text(line));
  }
}

TEST_CASE("atomic control tokens stay whole and label strings re-parse") {
  const std::vector<std::string> atomic = {"&", "flight_info", "flight_info+airfare",
                                           "from_city", "to_city"};
  const Vocabulary v =
      train_vocab({"flights from boston to denver on monday"}, 256, 1, atomic);
  const SemanticFrame f{{"flight_info", "airfare"},
                        {{"from_city", "boston"}, {"to_city", "denver"}}};
  const std::vector<int> ids = tokenize(linearize(f), v);
  for (int id : ids) CHECK(id != Vocabulary::kUnk);
  const std::string round = detokenize(ids, v);
  const FrameParse back = parse_frame(round, {"flight_info", "airfare"},
                                      {"from_city", "to_city"});
  CHECK(back.frame == f);
  CHECK(back.anomalies.empty());
}

TEST_CASE("vocabulary file round-trips bit-exactly") {
  namespace fs = std::filesystem;
  const Vocabulary v = train_vocab({"turn on the lights in the kitchen"}, 96, 1, {"&"});
  const fs::path dir = fs::temp_directory_path() / "slp_vocab_test";
  fs::create_directories(dir);
  const std::string p1 = (dir / "v1.txt").string();
  const std::string p2 = (dir / "v2.txt").string();
  save_vocab(v, p1);
  const Vocabulary l = load_vocab(p1);
  CHECK(l.tokens == v.tokens);
  save_vocab(l, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  fs::remove_all(dir);
}

TEST_CASE("loading rejects bad headers and duplicates") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "slp_vocab_bad";
  fs::create_directories(dir);
  {
    std::ofstream f((dir / "bad.txt").string());
    f << "#not-a-vocab\n[PAD]\n";
  }
  CHECK_THROWS(load_vocab((dir / "bad.txt").string()));
  fs::remove_all(dir);
}

#include <cmath>
#include <limits>

#include "doctest.h"
#include "slp/generator.hpp"
#include "slp/ops.hpp"

using namespace slp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ModelConfig tiny_cfg() {
  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.d_model = 8;
  cfg.d_ff = 16;
  cfg.vocab_size = 13;
  cfg.d_speech = 8;
  cfg.max_frames = 3;
  cfg.max_text = 6;
  return cfg;
}

SpeechEmbeddingSequence speech_of(int frames, int d, Rng& rng) {
  SpeechEmbeddingSequence s;
  s.frames = Tensor::randn({frames, d}, rng);
  return s;
}

}  // namespace

TEST_CASE("step_distribution: normalized, bans specials, respects length cap") {
  Rng rng(1);
  const ModelConfig cfg = tiny_cfg();
  const ModelParams params = ModelParams::init(cfg, rng, 0.3);
  const SpeechEmbeddingSequence speech = speech_of(2, cfg.d_speech, rng);

  const std::vector<double> d = step_distribution(speech, {8, 9}, params);
  REQUIRE(static_cast<int>(d.size()) == cfg.vocab_size);
  double mass = 0;
  for (double lp : d) mass += lp == -kInf ? 0.0 : std::exp(lp);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d[Vocabulary::kPad] == -kInf);
  CHECK(d[Vocabulary::kUnk] == -kInf);
  CHECK(d[Vocabulary::kBos] == -kInf);
  CHECK(d[Vocabulary::kSep] == -kInf);
  CHECK(d[Vocabulary::kMask] == -kInf);
  CHECK(d[Vocabulary::kEos] != -kInf);
  CHECK(d[Vocabulary::kSlu] != -kInf);

  const std::vector<int> too_long(static_cast<std::size_t>(cfg.max_text), 8);
  CHECK_THROWS(step_distribution(speech, too_long, params));
}

TEST_CASE("step_distribution: repeated calls are bit-identical") {
  Rng rng(2);
  const ModelConfig cfg = tiny_cfg();
  const ModelParams params = ModelParams::init(cfg, rng, 0.3);
  const SpeechEmbeddingSequence speech = speech_of(3, cfg.d_speech, rng);
  const std::vector<double> a = step_distribution(speech, {9}, params);
  const std::vector<double> b = step_distribution(speech, {9}, params);
  CHECK(a == b);
}

TEST_CASE("greedy_core: immediate EOS peak gives empty output") {
  const StepFn step = [](const std::vector<int>&) {
    std::vector<double> d(10, -5.0);
    d[Vocabulary::kEos] = -0.01;
    return d;
  };
  const Hypothesis h = greedy_core(step, Vocabulary::kEos, 4);
  CHECK(h.token_ids.empty());
  CHECK(h.finished);
  CHECK_FALSE(h.truncated);
  CHECK(h.logprob == doctest::Approx(-0.01));
}

TEST_CASE("greedy_core: max_len truncation is flagged") {
  const StepFn step = [](const std::vector<int>&) {
    std::vector<double> d(10, -kInf);
    d[8] = -0.1;
    d[Vocabulary::kEos] = -9.0;
    return d;
  };
  const Hypothesis h = greedy_core(step, Vocabulary::kEos, 3);
  CHECK(h.token_ids == std::vector<int>{8, 8, 8});
  CHECK(h.truncated);
}

TEST_CASE("beam_core: fixed-table two-beam trace matches the hand computation") {
  // Prefix-independent step table over {EOS=4, a=7, b=8}:
  //   logp(a) = log 0.5, logp(b) = log 0.3, logp(EOS) = log 0.2
  // Depth 1 candidates: a(-.69), b(-1.20), EOS(-1.61) -> keep {a, b}
  // Depth 2: aa(-1.39), ab(-1.90), a+EOS(-2.30), ba(-1.90), bb(-2.41), b+EOS(-2.81)
  //   -> keep {aa, ab} (ab beats ba lexicographically at equal score)
  // Depth 3 (max_len): both extend once more and are truncated:
  //   aaa(-2.08), aab(-2.59), aa+EOS(-3.00), aba(-2.59), ...
  const double la = std::log(0.5), lb = std::log(0.3), le = std::log(0.2);
  const StepFn step = [&](const std::vector<int>&) {
    std::vector<double> d(10, -kInf);
    d[7] = la;
    d[8] = lb;
    d[Vocabulary::kEos] = le;
    return d;
  };
  const std::vector<Hypothesis> beams = beam_core(step, Vocabulary::kEos, 3, 2);
  REQUIRE(beams.size() == 2);
  CHECK(beams[0].token_ids == std::vector<int>{7, 7, 7});
  CHECK(beams[0].logprob == doctest::Approx(3 * la).epsilon(1e-12));
  CHECK(beams[0].truncated);
  CHECK(beams[1].token_ids == std::vector<int>{7, 7, 8});
  CHECK(beams[1].logprob == doctest::Approx(2 * la + lb).epsilon(1e-12));
}

TEST_CASE("beam_core: finished hypotheses keep competing by total logprob") {
  // EOS is immediately attractive but continuing once then stopping wins.
  int calls = 0;
  const StepFn step = [&](const std::vector<int>& prefix) {
    ++calls;
    std::vector<double> d(10, -kInf);
    if (prefix.empty()) {
      d[Vocabulary::kEos] = std::log(0.4);
      d[7] = std::log(0.6);
    } else {
      d[Vocabulary::kEos] = std::log(0.9);
      d[7] = std::log(0.1);
    }
    return d;
  };
  const std::vector<Hypothesis> beams = beam_core(step, Vocabulary::kEos, 3, 4);
  CHECK(beams[0].token_ids == std::vector<int>{7});
  CHECK(beams[0].logprob == doctest::Approx(std::log(0.6) + std::log(0.9)).epsilon(1e-12));
  CHECK(calls > 0);
}

TEST_CASE("generation never emits structural specials") {
  Rng rng(3);
  const ModelConfig cfg = tiny_cfg();
  for (int trial = 0; trial < 30; ++trial) {
    const ModelParams params = ModelParams::init(cfg, rng, 0.6);
    const SpeechEmbeddingSequence speech = speech_of(2, cfg.d_speech, rng);
    DecodeConfig dc;
    dc.max_len = cfg.max_text - 1;
    dc.beam_size = 3;
    const BeamResult r = beam_generate(speech, params, dc);
    for (const Hypothesis& h : r.nbest)
      for (int id : h.token_ids) {
        CHECK(id != Vocabulary::kPad);
        CHECK(id != Vocabulary::kMask);
        CHECK(id != Vocabulary::kBos);
        CHECK(id != Vocabulary::kSep);
        CHECK(id != Vocabulary::kUnk);
      }
  }
}

TEST_CASE("two_pass_generate: transcript depends only on the first checkpoint") {
  Rng rng(4);
  const ModelConfig cfg = tiny_cfg();
  const ModelParams pre = ModelParams::init(cfg, rng, 0.4);
  const ModelParams ft1 = ModelParams::init(cfg, rng, 0.4);
  const ModelParams ft2 = ModelParams::init(cfg, rng, 0.4);
  const SpeechEmbeddingSequence speech = speech_of(3, cfg.d_speech, rng);

  Vocabulary vocab;
  for (const std::string& s : Vocabulary::special_strings()) {
    vocab.index[s] = vocab.size();
    vocab.tokens.push_back(s);
  }
  for (int i = 0; i < cfg.vocab_size - Vocabulary::kNumSpecials; ++i) {
    vocab.index["w" + std::to_string(i)] = vocab.size();
    vocab.tokens.push_back("w" + std::to_string(i));
  }

  DecodeConfig dc;
  dc.max_len = cfg.max_text - 1;
  const TwoPassResult a = two_pass_generate(speech, pre, ft1, vocab, dc);
  const TwoPassResult b = two_pass_generate(speech, pre, ft2, vocab, dc);
  CHECK(a.transcript == b.transcript);
}

TEST_CASE("split_asr_slu: boundary handling") {
  const AsrSluSplit mid = split_asr_slu({8, 9, Vocabulary::kSlu, 10});
  CHECK(mid.transcript_ids == std::vector<int>{8, 9});
  CHECK(mid.slu_ids == std::vector<int>{10});
  CHECK_FALSE(mid.missing_boundary);
  CHECK_FALSE(mid.leading_boundary);

  const AsrSluSplit none = split_asr_slu({8, 9});
  CHECK(none.transcript_ids == std::vector<int>{8, 9});
  CHECK(none.slu_ids.empty());
  CHECK(none.missing_boundary);

  const AsrSluSplit lead = split_asr_slu({Vocabulary::kSlu, 9});
  CHECK(lead.transcript_ids.empty());
  CHECK(lead.slu_ids == std::vector<int>{9});
  CHECK(lead.leading_boundary);
}

TEST_CASE("decode config validation") {
  DecodeConfig dc;
  dc.max_len = 0;
  CHECK_THROWS(dc.validate(8));
  dc.max_len = 9;
  CHECK_THROWS(dc.validate(8));
  dc.max_len = 8;
  CHECK_NOTHROW(dc.validate(8));
  dc.beam_size = 0;
  CHECK_THROWS(dc.validate(8));
}

TEST_CASE("nbest formatting") {
  Vocabulary vocab;
  for (const std::string& s : Vocabulary::special_strings()) {
    vocab.index[s] = vocab.size();
    vocab.tokens.push_back(s);
  }
  vocab.index["hello"] = vocab.size();
  vocab.tokens.push_back("hello");
  std::vector<Hypothesis> nbest = {{{7}, -0.5, true, false}, {{}, -1.25, true, false}};
  CHECK(format_nbest(nbest, vocab) == "1\t-0.500000\thello\n2\t-1.250000\t\n");
}

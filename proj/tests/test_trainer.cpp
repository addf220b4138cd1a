#include <cmath>
#include <cstring>

#include "doctest.h"
#include "slp/ops.hpp"
#include "slp/trainer.hpp"

using namespace slp;

namespace {

Vocabulary toy_vocab(int n_words = 12) {
  Vocabulary v;
  for (const std::string& s : Vocabulary::special_strings()) {
    v.index[s] = v.size();
    v.tokens.push_back(s);
  }
  for (int i = 0; i < n_words; ++i) {
    const std::string t = "w" + std::to_string(i);
    v.index[t] = v.size();
    v.tokens.push_back(t);
  }
  return v;
}

ModelConfig tiny_cfg() {
  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.d_model = 16;
  cfg.d_ff = 32;
  cfg.vocab_size = 0;  // set from vocab
  cfg.d_speech = 8;
  cfg.max_frames = 10;
  cfg.max_text = 8;
  return cfg;
}

TrainingExample example_of(const std::vector<int>& target, int frames, Rng& rng, int d_speech) {
  TrainingExample ex;
  ex.speech.frames = Tensor::randn({frames, d_speech}, rng);
  ex.target_text = target;
  return ex;
}

}  // namespace

TEST_CASE("apply_masking: budget arithmetic selects exactly one token") {
  Vocabulary v = toy_vocab();
  MaskingPolicy policy;
  policy.mask_rate = 0.1;  // ceil(0.1 * 7) = 1
  Rng rng(1);
  const std::vector<int> text = {8, 9, 10, 11, 12, 13, 14};
  const MaskingResult mr = apply_masking(text, policy, rng, v);
  CHECK(mr.positions.size() == 1);
  CHECK(mr.target_ids[0] == text[static_cast<std::size_t>(mr.positions[0])]);
}

TEST_CASE("apply_masking: degenerate all-mask unigram policy") {
  Vocabulary v = toy_vocab();
  MaskingPolicy policy;
  policy.replace_mask_p = 1.0;
  policy.replace_random_p = 0.0;
  policy.keep_original_p = 0.0;
  policy.unigram_p = 1.0;
  policy.multigram_p = 0.0;
  Rng rng(2);
  const std::vector<int> text = {8, 9, 10, 11, 12, 13, 14, 8, 9, 10};
  const MaskingResult mr = apply_masking(text, policy, rng, v);
  CHECK_FALSE(mr.positions.empty());
  for (int p : mr.positions) CHECK(mr.corrupted[static_cast<std::size_t>(p)] == Vocabulary::kMask);
  for (int s : mr.drawn_span_lengths) CHECK(s == 1);
}

TEST_CASE("apply_masking: never selects the [SLU] boundary, targets are originals") {
  Vocabulary v = toy_vocab();
  MaskingPolicy policy;
  policy.mask_rate = 0.6;
  Rng rng(3);
  std::vector<int> text = {8, 9, Vocabulary::kSlu, 10, 11};
  for (int trial = 0; trial < 200; ++trial) {
    const MaskingResult mr = apply_masking(text, policy, rng, v);
    for (std::size_t i = 0; i < mr.positions.size(); ++i) {
      CHECK(text[static_cast<std::size_t>(mr.positions[i])] != Vocabulary::kSlu);
      CHECK(mr.target_ids[i] == text[static_cast<std::size_t>(mr.positions[i])]);
    }
    CHECK(mr.corrupted[2] == Vocabulary::kSlu);
  }
}

TEST_CASE("apply_masking: replacement never produces structural specials") {
  Vocabulary v = toy_vocab();
  MaskingPolicy policy;
  policy.replace_mask_p = 0.0;
  policy.replace_random_p = 1.0;
  policy.keep_original_p = 0.0;
  Rng rng(4);
  const std::vector<int> text(12, 9);
  for (int trial = 0; trial < 100; ++trial) {
    const MaskingResult mr = apply_masking(text, policy, rng, v);
    for (int p : mr.positions) {
      const int id = mr.corrupted[static_cast<std::size_t>(p)];
      CHECK(id >= Vocabulary::kNumSpecials);
    }
  }
}

TEST_CASE("apply_masking: empty sequence is an error") {
  Vocabulary v = toy_vocab();
  MaskingPolicy policy;
  Rng rng(5);
  CHECK_THROWS(apply_masking({}, policy, rng, v));
}

TEST_CASE("apply_masking: masked fraction tracks the configured rate") {
  Vocabulary v = toy_vocab();
  MaskingPolicy policy;
  Rng rng(6);
  const std::vector<int> text(40, 10);
  long long selected = 0, total = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const MaskingResult mr = apply_masking(text, policy, rng, v);
    selected += static_cast<long long>(mr.positions.size());
    total += static_cast<long long>(text.size());
  }
  const double frac = static_cast<double>(selected) / static_cast<double>(total);
  CHECK(std::abs(frac - policy.mask_rate) < 0.01);
}

TEST_CASE("training_step: deterministic, loss matches a manual recomputation") {
  Vocabulary v = toy_vocab();
  ModelConfig cfg = tiny_cfg();
  cfg.vocab_size = v.size();
  MaskingPolicy policy;
  Rng drng(7);
  const TrainingExample ex = example_of({8, 9, 10, 11}, 6, drng, cfg.d_speech);

  auto run_once = [&](double lr) {
    Rng rng(100);
    ModelParams params = ModelParams::init(cfg, rng, 0.2);
    AdamOptimizer adam({lr, 0.9, 0.999, 1e-8});
    adam.init(params.all());
    const StepStats st = training_step({&ex}, {42}, params, adam, policy, v);
    return std::make_pair(st, std::move(params));
  };

  auto [s1, p1] = run_once(1e-3);
  auto [s2, p2] = run_once(1e-3);
  CHECK(s1.loss == s2.loss);
  CHECK(s1.positions == s2.positions);
  const auto a1 = p1.all();
  const auto a2 = p2.all();
  for (std::size_t i = 0; i < a1.size(); ++i)
    CHECK(std::memcmp(a1[i]->value.ptr(), a2[i]->value.ptr(),
                      a1[i]->value.numel() * sizeof(double)) == 0);

  // manual recomputation of the same loss (before the update)
  {
    Rng rng(100);
    ModelParams params = ModelParams::init(cfg, rng, 0.2);
    Rng mrng(42);
    MaskingResult mr = apply_masking(ex.target_text, policy, mrng, v);
    if (mr.positions.empty()) mr = apply_masking(ex.target_text, policy, mrng, v);
    std::vector<int> text = mr.corrupted;
    text.push_back(Vocabulary::kMask);
    NoGradGuard ng;
    const JointInput joint = compose(ex.speech, text, params);
    const Tensor logits = mlm_logits(forward(joint, params, mask_for(joint)), params);
    std::vector<int> positions, targets;
    for (std::size_t i = 0; i < mr.positions.size(); ++i) {
      positions.push_back(joint.text_begin() + mr.positions[i]);
      targets.push_back(mr.target_ids[i]);
    }
    positions.push_back(joint.text_begin() + static_cast<int>(mr.corrupted.size()));
    targets.push_back(Vocabulary::kEos);
    const double manual =
        cross_entropy_masked(logits, targets, positions).item() / positions.size();
    CHECK(s1.loss == doctest::Approx(manual).epsilon(1e-12));
    CHECK(s1.positions == static_cast<long long>(positions.size()));
  }
}

TEST_CASE("training_step: single example converges to near-zero loss") {
  Vocabulary v = toy_vocab();
  ModelConfig cfg = tiny_cfg();
  cfg.vocab_size = v.size();
  MaskingPolicy policy;
  policy.replace_mask_p = 1.0;
  policy.replace_random_p = 0.0;
  policy.keep_original_p = 0.0;
  Rng drng(8);
  const TrainingExample ex = example_of({8, 9, 10}, 5, drng, cfg.d_speech);

  Rng rng(9);
  ModelParams params = ModelParams::init(cfg, rng, 0.2);
  AdamOptimizer adam({5e-3, 0.9, 0.999, 1e-8});
  adam.init(params.all());
  double last = 1e9;
  for (int step = 0; step < 900; ++step) {
    const StepStats st = training_step({&ex}, {static_cast<std::uint64_t>(step % 7)}, params,
                                       adam, policy, v);
    last = st.loss;
  }
  CHECK(last < 1e-3);
}

TEST_CASE("run_regime: zero epochs leaves parameters untouched") {
  Vocabulary v = toy_vocab();
  ModelConfig cfg = tiny_cfg();
  cfg.vocab_size = v.size();
  Rng rng(10);
  ModelParams params = ModelParams::init(cfg, rng, 0.2);
  const std::vector<double> before = *params.tok_emb.value.data;

  std::vector<TrainingExample> data;
  Rng drng(11);
  data.push_back(example_of({8, 9}, 4, drng, cfg.d_speech));

  TrainConfig tc;
  tc.epochs = 0;
  const RegimeResult rr = run_regime(data, params, MaskingPolicy{}, tc, v);
  CHECK(rr.epoch_mean_loss.empty());
  CHECK(*params.tok_emb.value.data == before);
}

TEST_CASE("run_regime: memorization loss is non-increasing after smoothing") {
  Vocabulary v = toy_vocab();
  ModelConfig cfg = tiny_cfg();
  cfg.vocab_size = v.size();
  cfg.max_text = 10;

  std::vector<TrainingExample> data;
  Rng drng(12);
  for (int i = 0; i < 50; ++i) {
    std::vector<int> target;
    const int len = 5 + static_cast<int>(drng.below(4));
    for (int t = 0; t < len; ++t)
      target.push_back(Vocabulary::kNumSpecials + static_cast<int>(drng.below(12)));
    data.push_back(example_of(target, 3 + static_cast<int>(drng.below(5)), drng, cfg.d_speech));
  }

  Rng rng(13);
  ModelParams params = ModelParams::init(cfg, rng, 0.2);
  TrainConfig tc;
  tc.epochs = 220;
  tc.batch_size = 10;
  tc.lr = 4e-3;
  tc.seed = 5;
  MaskingPolicy policy;
  policy.mask_rate = 0.3;
  const RegimeResult rr = run_regime(data, params, policy, tc, v);
  REQUIRE(rr.epoch_mean_loss.size() == 220);

  // Window-5 moving average. Per-epoch losses carry resampled-mask noise, so
  // monotonicity is checked against the running minimum with an allowance of
  // 5% of the total descent.
  std::vector<double> smoothed;
  for (std::size_t i = 0; i + 5 <= rr.epoch_mean_loss.size(); ++i) {
    double s = 0;
    for (std::size_t j = i; j < i + 5; ++j) s += rr.epoch_mean_loss[j];
    smoothed.push_back(s / 5);
  }
  const double descent = smoothed.front() - smoothed.back();
  CHECK(descent > 0.0);
  CHECK(smoothed.back() < 0.25 * smoothed.front());
  double running_min = smoothed.front();
  int violations = 0;
  for (double s : smoothed) {
    if (s > running_min + 0.05 * descent) ++violations;
    running_min = std::min(running_min, s);
  }
  CHECK(violations == 0);

  // loss log format
  CHECK(rr.loss_log.rfind("epoch 1 step 1 loss ", 0) == 0);
}

TEST_CASE("run_regime: empty dataset is an error") {
  Vocabulary v = toy_vocab();
  ModelConfig cfg = tiny_cfg();
  cfg.vocab_size = v.size();
  Rng rng(14);
  ModelParams params = ModelParams::init(cfg, rng);
  TrainConfig tc;
  CHECK_THROWS(run_regime({}, params, MaskingPolicy{}, tc, v));
}

TEST_CASE("masking policy validation") {
  MaskingPolicy p;
  p.replace_mask_p = 0.9;
  CHECK_THROWS(p.validate());
  p = MaskingPolicy{};
  p.mask_rate = 0.0;
  CHECK_THROWS(p.validate());
  p = MaskingPolicy{};
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("regime names round-trip") {
  for (Regime r : {Regime::kPretrainAsr, Regime::kFinetuneSlu, Regime::kOnestepSlu,
                   Regime::kOnestepAsrSlu})
    CHECK(regime_from_name(regime_name(r)) == r);
  CHECK_THROWS(regime_from_name("bogus"));
}

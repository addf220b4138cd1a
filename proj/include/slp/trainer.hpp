#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slp/corpus.hpp"
#include "slp/model.hpp"
#include "slp/tokenizer.hpp"

namespace slp {

enum class Regime { kPretrainAsr, kFinetuneSlu, kOnestepSlu, kOnestepAsrSlu };

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);

// Text-token corruption scheme: fraction of tokens selected via span draws,
// each selected token replaced by [MASK] / random token / original.
struct MaskingPolicy {
  double mask_rate = 0.15;
  double replace_mask_p = 0.8;
  double replace_random_p = 0.1;
  double keep_original_p = 0.1;
  double unigram_p = 0.8;
  double multigram_p = 0.2;  // split evenly between bigram and trigram

  void validate() const;
};

struct MaskingResult {
  std::vector<int> corrupted;
  std::vector<int> positions;   // selected positions, ascending
  std::vector<int> target_ids;  // original ids at those positions
  // Policy draws, recorded for the statistics checks: span lengths as
  // sampled (before any budget clamp) and the replacement kind per selected
  // token (0 = mask, 1 = random, 2 = keep).
  std::vector<int> drawn_span_lengths;
  std::vector<int> replace_kinds;
};

// Selects ~mask_rate of the maskable tokens (specials other than [UNK] are
// never selected) by drawing spans until the budget ceil(rate*len) is met;
// the final span is clamped to the remaining budget.
MaskingResult apply_masking(const std::vector<int>& text_ids, const MaskingPolicy& policy,
                            Rng& rng, const Vocabulary& vocab);

struct TrainConfig {
  int batch_size = 16;
  double lr = 1e-3;
  int epochs = 10;
  std::uint64_t seed = 1;
  Regime regime = Regime::kPretrainAsr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 0.0;  // 0 disables

  void validate() const;
};

struct TrainingExample {
  SpeechEmbeddingSequence speech;
  std::vector<int> target_text;  // no specials except an optional [SLU] boundary
};

// Loads embeddings and builds regime-specific targets: transcript tokens,
// linearized-frame tokens, or transcript [SLU] frame.
std::vector<TrainingExample> build_examples(const Manifest& manifest, const Vocabulary& vocab,
                                            Regime regime);

struct StepStats {
  double loss = 0.0;          // mean over masked positions
  long long positions = 0;
  int skipped_examples = 0;
};

// One optimizer step over a batch: corrupt, compose, forward, masked
// cross-entropy (normalized by masked-position count), backward, Adam.
// example_seeds supplies the deterministic per-example rng stream.
StepStats training_step(const std::vector<const TrainingExample*>& batch,
                        const std::vector<std::uint64_t>& example_seeds, ModelParams& params,
                        AdamOptimizer& adam, const MaskingPolicy& policy,
                        const Vocabulary& vocab, double grad_clip = 0.0);

struct RegimeResult {
  std::string loss_log;                 // "epoch <n> step <k> loss <v>" lines
  std::vector<double> epoch_mean_loss;
};

// Runs the configured number of epochs over the dataset, shuffling with a
// per-epoch seed. Parameters are updated in place.
RegimeResult run_regime(const std::vector<TrainingExample>& dataset, ModelParams& params,
                        const MaskingPolicy& policy, const TrainConfig& cfg,
                        const Vocabulary& vocab);

}  // namespace slp

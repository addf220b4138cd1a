#pragma once

#include <functional>
#include <string>
#include <vector>

#include "slp/model.hpp"
#include "slp/tokenizer.hpp"

namespace slp {

// Partial generation state. token_ids never include [EOS]; finished means
// [EOS] was chosen (or max_len truncated the hypothesis, flagged).
struct Hypothesis {
  std::vector<int> token_ids;
  double logprob = 0.0;
  bool finished = false;
  bool truncated = false;
};

enum class DecodeMode { kGreedy, kBeam };
enum class DecodeOutput { kTranscript, kSlu, kAsrSlu, kTwoPass };

struct DecodeConfig {
  DecodeMode mode = DecodeMode::kBeam;
  int beam_size = 4;
  int max_len = 0;  // must be <= model max_text
  DecodeOutput output = DecodeOutput::kTranscript;

  void validate(int max_text) const;
};

// Log-probability distribution at a [MASK] position anywhere in the text:
// text_ids[position] must be [MASK]. Specials other than [EOS] and [SLU] are
// blocked (-inf) before the log-softmax.
std::vector<double> distribution_at(const SpeechEmbeddingSequence& speech,
                                    const std::vector<int>& text_ids, int position,
                                    const ModelParams& params);

// Next-token log-probability distribution: composes
// [BOS] speech [SEP] prefix [MASK], runs the model, and log-softmaxes the
// [MASK] row with every special except [EOS] and [SLU] blocked (-inf).
std::vector<double> step_distribution(const SpeechEmbeddingSequence& speech,
                                      const std::vector<int>& prefix, const ModelParams& params);

// Decoding cores over an abstract step function (also drives the toy-model
// oracles in the tests).
using StepFn = std::function<std::vector<double>(const std::vector<int>& prefix)>;

Hypothesis greedy_core(const StepFn& step, int eos_id, int max_len);
// Returns hypotheses sorted by total log-probability (no length penalty).
std::vector<Hypothesis> beam_core(const StepFn& step, int eos_id, int max_len, int beam_size);

StepFn make_step_fn(const SpeechEmbeddingSequence& speech, const ModelParams& params);

Hypothesis greedy_generate(const SpeechEmbeddingSequence& speech, const ModelParams& params,
                           const DecodeConfig& cfg);

struct BeamResult {
  Hypothesis best;
  std::vector<Hypothesis> nbest;
};
BeamResult beam_generate(const SpeechEmbeddingSequence& speech, const ModelParams& params,
                         const DecodeConfig& cfg);

// Transcript from the first model, linearized frame string from the second.
struct TwoPassResult {
  std::string transcript;
  std::string slu;
};
TwoPassResult two_pass_generate(const SpeechEmbeddingSequence& speech,
                                const ModelParams& pretrained, const ModelParams& finetuned,
                                const Vocabulary& vocab, const DecodeConfig& cfg);

// Split a joint ASR+SLU generation at the first [SLU] token.
struct AsrSluSplit {
  std::vector<int> transcript_ids;
  std::vector<int> slu_ids;
  bool missing_boundary = false;
  bool leading_boundary = false;
};
AsrSluSplit split_asr_slu(const std::vector<int>& ids);

// "<rank>\t<logprob>\t<detokenized text>" lines.
std::string format_nbest(const std::vector<Hypothesis>& nbest, const Vocabulary& vocab);

}  // namespace slp

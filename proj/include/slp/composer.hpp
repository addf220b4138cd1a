#pragma once

#include <vector>

#include "slp/config.hpp"
#include "slp/corpus.hpp"
#include "slp/tensor.hpp"

namespace slp {

struct ModelParams;

enum Segment : int { kSegSpeech = 0, kSegText = 1 };

// The composed model input: [BOS] frames [SEP] text [EOS] padding, with one
// embedding row per position (base + position + segment). Content is
// contiguous; padding fills the tail up to max_positions.
struct JointInput {
  Tensor embeddings;             // L x d_model, graph-connected to the parameters
  std::vector<int> token_ids;    // -1 sentinel at speech positions
  std::vector<int> segment_ids;  // kSegSpeech / kSegText
  std::vector<char> is_pad;
  int n_frames = 0;  // frames kept after trimming
  int n_text = 0;    // text tokens kept after trimming

  int length() const { return static_cast<int>(token_ids.size()); }
  int bos_pos() const { return 0; }
  int sep_pos() const { return 1 + n_frames; }
  int text_begin() const { return 2 + n_frames; }
  int text_end() const { return 2 + n_frames + n_text; }  // exclusive
  int eos_pos() const { return text_end(); }
  std::pair<int, int> speech_span() const { return {1, 1 + n_frames}; }
  std::pair<int, int> text_span() const { return {text_begin(), text_end()}; }
};

// Affine per-frame projection into model space.
Tensor project_speech(const Tensor& frames, const Parameter& w, const Parameter& b);

// Builds the joint input. text_ids may contain [MASK]/[SLU]/[UNK] but no
// structural specials ([BOS]/[SEP]/[EOS]/[PAD]).
JointInput compose(const SpeechEmbeddingSequence& speech, const std::vector<int>& text_ids,
                   const ModelParams& params);

}  // namespace slp

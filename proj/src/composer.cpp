#include "slp/composer.hpp"

#include <stdexcept>

#include "slp/model.hpp"
#include "slp/ops.hpp"
#include "slp/tokenizer.hpp"

namespace slp {

Tensor project_speech(const Tensor& frames, const Parameter& w, const Parameter& b) {
  if (frames.cols() != w.value.rows())
    throw std::runtime_error("project_speech: frame dim " + std::to_string(frames.cols()) +
                             " does not match projection input dim " +
                             std::to_string(w.value.rows()));
  return add_bias_rows(matmul(frames, w.value), b.value);
}

JointInput compose(const SpeechEmbeddingSequence& speech, const std::vector<int>& text_ids,
                   const ModelParams& params) {
  const ModelConfig& cfg = params.cfg;
  if (speech.frames.numel() == 0 || speech.frames.rows() < 1)
    throw std::runtime_error("compose: empty speech input");
  for (int id : text_ids)
    if (id == Vocabulary::kBos || id == Vocabulary::kSep || id == Vocabulary::kEos ||
        id == Vocabulary::kPad)
      throw std::runtime_error("compose: structural special token " + std::to_string(id) +
                               " in text");

  const int k = std::min(speech.frames.rows(), cfg.max_frames);
  const int m = std::min(static_cast<int>(text_ids.size()), cfg.max_text);
  const int L = cfg.max_positions();

  JointInput in;
  in.n_frames = k;
  in.n_text = m;
  in.token_ids.assign(static_cast<std::size_t>(L), Vocabulary::kPad);
  in.segment_ids.assign(static_cast<std::size_t>(L), kSegText);
  in.is_pad.assign(static_cast<std::size_t>(L), 0);

  in.token_ids[0] = Vocabulary::kBos;
  for (int i = 0; i < k; ++i) in.token_ids[1 + i] = -1;
  in.token_ids[in.sep_pos()] = Vocabulary::kSep;
  for (int i = 0; i < m; ++i) in.token_ids[in.text_begin() + i] = text_ids[i];
  in.token_ids[in.eos_pos()] = Vocabulary::kEos;
  for (int i = 0; i <= in.sep_pos(); ++i) in.segment_ids[i] = kSegSpeech;
  for (int i = in.eos_pos() + 1; i < L; ++i) in.is_pad[i] = 1;

  // Base rows: token lookups everywhere except the projected frames.
  Tensor frames = speech.frames;
  if (speech.frames.rows() > k) frames = slice_rows(speech.frames, 0, k);
  const Tensor projected = project_speech(frames, params.proj_w, params.proj_b);

  std::vector<Tensor> parts;
  parts.push_back(embedding_lookup(params.tok_emb.value, {Vocabulary::kBos}));
  parts.push_back(projected);
  std::vector<int> tail_ids(in.token_ids.begin() + in.sep_pos(), in.token_ids.end());
  parts.push_back(embedding_lookup(params.tok_emb.value, tail_ids));
  const Tensor base = concat_rows(parts);

  if (params.pos_emb.value.rows() < L)
    throw std::runtime_error("compose: position table has " +
                             std::to_string(params.pos_emb.value.rows()) + " rows, need " +
                             std::to_string(L));
  const Tensor pos = params.pos_emb.value.rows() == L
                         ? params.pos_emb.value
                         : slice_rows(params.pos_emb.value, 0, L);
  const Tensor seg = embedding_lookup(params.seg_emb.value, in.segment_ids);

  in.embeddings = add(add(base, pos), seg);
  return in;
}

}  // namespace slp

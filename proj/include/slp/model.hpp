#pragma once

#include <string>
#include <vector>

#include "slp/composer.hpp"
#include "slp/config.hpp"
#include "slp/tensor.hpp"

namespace slp {

// Additive self-attention mask: 0 = allow, -inf = block. Padding columns are
// blocked in every row (pad rows therefore come out all -inf; self_attention
// pins those rows to self-attention so the softmax stays defined, and their
// outputs are ignored).
struct AttentionMask {
  Tensor m;  // L x L, constant (no grad)
};

// Part-boundary form: positions [0, speech_part_end) are the bidirectional
// speech part (incl. [BOS] and [SEP]), [speech_part_end, text_part_end) the
// causal text part (incl. [EOS]), the rest padding.
AttentionMask build_mask_parts(int length, int speech_part_end, int text_part_end);

// Span form per the joint layout; validates span ordering and padding flags.
AttentionMask build_mask(std::pair<int, int> speech_span, std::pair<int, int> text_span,
                         const std::vector<char>& is_pad);

AttentionMask mask_for(const JointInput& input);

struct LayerParams {
  Parameter wq, bq, wk, bk, wv, bv, wo, bo;
  Parameter ln1_g, ln1_b;
  Parameter ff_w1, ff_b1, ff_w2, ff_b2;
  Parameter ln2_g, ln2_b;
};

struct ModelParams {
  ModelConfig cfg;
  Parameter tok_emb;   // vocab x d_model (also the tied MLM head)
  Parameter pos_emb;   // max_positions x d_model
  Parameter seg_emb;   // 2 x d_model
  Parameter proj_w;    // d_speech x d_model
  Parameter proj_b;    // d_model
  Parameter emb_ln_g, emb_ln_b;
  std::vector<LayerParams> layers;
  Parameter mlm_bias;  // vocab

  static ModelParams init(const ModelConfig& cfg, Rng& rng, double init_std = 0.02);

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t num_params() const;

  // Shares value buffers, allocates fresh zeroed grads (per-worker views).
  ModelParams grad_view() const;
};

// Pre-residual multi-head attention core: softmax(QK^T/sqrt(d_k) + M)V per
// head, heads concatenated, output-projected.
Tensor attention_core(const Tensor& x, const LayerParams& lp, const AttentionMask& mask,
                      const ModelConfig& cfg);

// Post-norm block: LN(x + attention), then LN(y + FFN(y)).
Tensor self_attention(const Tensor& x, const LayerParams& lp, const AttentionMask& mask,
                      const ModelConfig& cfg);

// Embedding layer norm, then the block stack.
Tensor forward(const JointInput& input, const ModelParams& params, const AttentionMask& mask);

// Position-wise vocabulary logits, weight-tied to the token embedding table.
Tensor mlm_logits(const Tensor& hidden, const ModelParams& params);

// Checkpoint: "#slp-ckpt v1" line, "#config <kv>" line, then binary records
// (u64-LE name length, name bytes, u64-LE rank, u64-LE dims, f32-LE values).
void save_checkpoint(const ModelParams& params, const std::string& path,
                     const std::string& extra_meta = "");
struct Checkpoint {
  ModelParams params;
  std::string meta;  // full #config line payload
};
Checkpoint load_checkpoint(const std::string& path);

constexpr double kLayerNormEps = 1e-12;

}  // namespace slp

#pragma once

#include <string>

namespace slp {

// Architecture plus sequence-layout dimensions. The joint sequence is
// [BOS] + max_frames + [SEP] + max_text + [EOS], so max_positions is derived.
struct ModelConfig {
  int n_layers = 2;
  int n_heads = 4;
  int d_model = 64;
  int d_ff = 256;
  int vocab_size = 0;
  int d_speech = 32;
  int max_frames = 64;
  int max_text = 24;

  int d_k() const { return d_model / n_heads; }
  int max_positions() const { return max_frames + max_text + 3; }

  void validate() const;

  // Space-separated key=value round-trip (used in checkpoint headers).
  std::string to_kv() const;
  static ModelConfig from_kv(const std::string& kv);
};

}  // namespace slp

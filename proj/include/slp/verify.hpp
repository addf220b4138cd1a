#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace slp {

struct VerifyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Autodiff vs central finite differences (h=1e-5) over every parameter of a
// 2-layer 2-head model; max relative error must stay below 1e-4.
VerifyResult verify_gradcheck(std::uint64_t seed);
// Same sweep on a model under 5k parameters.
VerifyResult verify_gradcheck_small(std::uint64_t seed);

// Randomized perturbation trials: future text tokens cannot change earlier
// logits, text cannot change speech-part hidden states, padding changes
// nothing. Bit-exact comparisons.
VerifyResult verify_mask_causality(int trials, std::uint64_t seed);

// Per-step mask-append logits equal the re-scored logits of the full final
// sequence with [MASK] substituted at that position, bit-exactly.
VerifyResult verify_teacher_forcing(int sequences, std::uint64_t seed);

// Full-width beam equals exhaustive-enumeration argmax on bounded instances.
VerifyResult verify_beam_oracle(int trials, std::uint64_t seed);
// beam_size=1 equals greedy decoding.
VerifyResult verify_beam_greedy(int trials, std::uint64_t seed);

// Empirical masking statistics over at least min_draws policy draws: span
// mix within +-1 point of 80/10/10 and replacement mix within +-1 point of
// 80/10/10.
VerifyResult verify_masking_stats(long long min_draws, std::uint64_t seed);

VerifyResult verify_codec_roundtrip(int n, std::uint64_t seed);
VerifyResult verify_wer_oracle(int n, std::uint64_t seed);
VerifyResult verify_score_oracle(int trials, std::uint64_t seed);

std::vector<VerifyResult> verify_all(std::uint64_t seed);

}  // namespace slp

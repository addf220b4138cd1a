#include "slp/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "slp/ops.hpp"

namespace slp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void DecodeConfig::validate(int max_text) const {
  if (beam_size < 1) throw std::runtime_error("decode config: beam_size must be >= 1");
  if (max_len < 1 || max_len > max_text)
    throw std::runtime_error("decode config: max_len " + std::to_string(max_len) +
                             " must be in [1, max_text=" + std::to_string(max_text) + "]");
}

std::vector<double> distribution_at(const SpeechEmbeddingSequence& speech,
                                    const std::vector<int>& text_ids, int position,
                                    const ModelParams& params) {
  if (position < 0 || position >= static_cast<int>(text_ids.size()) ||
      text_ids[static_cast<std::size_t>(position)] != Vocabulary::kMask)
    throw std::runtime_error("distribution_at: position " + std::to_string(position) +
                             " does not hold [MASK]");
  NoGradGuard ng;
  const JointInput joint = compose(speech, text_ids, params);
  if (position >= joint.n_text)
    throw std::runtime_error("distribution_at: position trimmed away");
  const AttentionMask mask = mask_for(joint);
  const Tensor hidden = forward(joint, params, mask);
  const int row = joint.text_begin() + position;
  const Tensor logits = mlm_logits(slice_rows(hidden, row, row + 1), params);

  const int V = logits.cols();
  std::vector<double> banned(static_cast<std::size_t>(V));
  const double* lv = logits.ptr();
  for (int j = 0; j < V; ++j) banned[static_cast<std::size_t>(j)] = lv[j];
  for (int j = 0; j < Vocabulary::kNumSpecials && j < V; ++j)
    if (j != Vocabulary::kEos && j != Vocabulary::kSlu) banned[static_cast<std::size_t>(j)] = -kInf;

  double mx = -kInf;
  for (double v : banned)
    if (v > mx) mx = v;
  double z = 0.0;
  for (double v : banned) z += v == -kInf ? 0.0 : std::exp(v - mx);
  const double lse = mx + std::log(z);
  for (double& v : banned) v = v == -kInf ? -kInf : v - lse;
  return banned;
}

std::vector<double> step_distribution(const SpeechEmbeddingSequence& speech,
                                      const std::vector<int>& prefix,
                                      const ModelParams& params) {
  if (static_cast<int>(prefix.size()) + 1 > params.cfg.max_text)
    throw std::runtime_error("step_distribution: prefix length " +
                             std::to_string(prefix.size()) +
                             " leaves no room for [MASK] (max_text " +
                             std::to_string(params.cfg.max_text) + ")");
  std::vector<int> text = prefix;
  text.push_back(Vocabulary::kMask);
  return distribution_at(speech, text, static_cast<int>(prefix.size()), params);
}

Hypothesis greedy_core(const StepFn& step, int eos_id, int max_len) {
  Hypothesis hyp;
  while (static_cast<int>(hyp.token_ids.size()) < max_len) {
    const std::vector<double> d = step(hyp.token_ids);
    int best = 0;
    for (int v = 1; v < static_cast<int>(d.size()); ++v)
      if (d[static_cast<std::size_t>(v)] > d[static_cast<std::size_t>(best)]) best = v;
    hyp.logprob += d[static_cast<std::size_t>(best)];
    if (best == eos_id) {
      hyp.finished = true;
      return hyp;
    }
    hyp.token_ids.push_back(best);
  }
  hyp.finished = true;
  hyp.truncated = true;
  return hyp;
}

std::vector<Hypothesis> beam_core(const StepFn& step, int eos_id, int max_len, int beam_size) {
  if (beam_size < 1) throw std::runtime_error("beam_core: beam_size must be >= 1");
  std::vector<Hypothesis> beams = {Hypothesis{}};

  const auto better = [](const Hypothesis& a, const Hypothesis& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.token_ids < b.token_ids;  // deterministic tie-break, argmax-compatible
  };

  for (int depth = 0; depth < max_len; ++depth) {
    bool any_open = false;
    for (const Hypothesis& h : beams) any_open = any_open || !h.finished;
    if (!any_open) break;

    std::vector<Hypothesis> candidates;
    for (const Hypothesis& h : beams) {
      if (h.finished) {
        candidates.push_back(h);
        continue;
      }
      const std::vector<double> d = step(h.token_ids);
      for (int v = 0; v < static_cast<int>(d.size()); ++v) {
        const double lp = d[static_cast<std::size_t>(v)];
        if (lp == -kInf) continue;
        Hypothesis next = h;
        next.logprob += lp;
        if (v == eos_id) {
          next.finished = true;
        } else {
          next.token_ids.push_back(v);
          if (static_cast<int>(next.token_ids.size()) == max_len) {
            next.finished = true;
            next.truncated = true;
          }
        }
        candidates.push_back(std::move(next));
      }
    }
    std::sort(candidates.begin(), candidates.end(), better);
    if (static_cast<int>(candidates.size()) > beam_size) candidates.resize(static_cast<std::size_t>(beam_size));
    beams = std::move(candidates);
  }
  std::sort(beams.begin(), beams.end(), better);
  for (Hypothesis& h : beams)
    if (!h.finished) {
      h.finished = true;
      h.truncated = true;
    }
  return beams;
}

StepFn make_step_fn(const SpeechEmbeddingSequence& speech, const ModelParams& params) {
  return [&speech, &params](const std::vector<int>& prefix) {
    return step_distribution(speech, prefix, params);
  };
}

Hypothesis greedy_generate(const SpeechEmbeddingSequence& speech, const ModelParams& params,
                           const DecodeConfig& cfg) {
  cfg.validate(params.cfg.max_text);
  return greedy_core(make_step_fn(speech, params), Vocabulary::kEos, cfg.max_len);
}

BeamResult beam_generate(const SpeechEmbeddingSequence& speech, const ModelParams& params,
                         const DecodeConfig& cfg) {
  cfg.validate(params.cfg.max_text);
  BeamResult res;
  res.nbest = beam_core(make_step_fn(speech, params), Vocabulary::kEos, cfg.max_len,
                        cfg.beam_size);
  res.best = res.nbest.front();
  return res;
}

TwoPassResult two_pass_generate(const SpeechEmbeddingSequence& speech,
                                const ModelParams& pretrained, const ModelParams& finetuned,
                                const Vocabulary& vocab, const DecodeConfig& cfg) {
  TwoPassResult out;
  out.transcript = detokenize(beam_generate(speech, pretrained, cfg).best.token_ids, vocab);
  out.slu = detokenize(beam_generate(speech, finetuned, cfg).best.token_ids, vocab);
  return out;
}

AsrSluSplit split_asr_slu(const std::vector<int>& ids) {
  AsrSluSplit out;
  const auto it = std::find(ids.begin(), ids.end(), Vocabulary::kSlu);
  if (it == ids.end()) {
    out.transcript_ids = ids;
    out.missing_boundary = true;
    return out;
  }
  out.transcript_ids.assign(ids.begin(), it);
  out.slu_ids.assign(it + 1, ids.end());
  out.leading_boundary = out.transcript_ids.empty();
  return out;
}

std::string format_nbest(const std::vector<Hypothesis>& nbest, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    char head[48];
    std::snprintf(head, sizeof(head), "%zu\t%.6f\t", i + 1, nbest[i].logprob);
    out += head;
    out += detokenize(nbest[i].token_ids, vocab);
    out += "\n";
  }
  return out;
}

}  // namespace slp

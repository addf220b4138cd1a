#include "slp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <set>

#include "slp/generator.hpp"
#include "slp/ops.hpp"
#include "slp/trainer.hpp"

namespace slp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

SpeechEmbeddingSequence random_speech(int frames, int d_speech, Rng& rng) {
  SpeechEmbeddingSequence s;
  s.frames = Tensor::randn({frames, d_speech}, rng, 1.0);
  return s;
}

std::vector<int> random_text(int len, int vocab_size, Rng& rng) {
  std::vector<int> ids(static_cast<std::size_t>(len));
  for (int& id : ids)
    id = Vocabulary::kNumSpecials +
         static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab_size - Vocabulary::kNumSpecials)));
  return ids;
}

struct GradCheckSetup {
  ModelParams params;
  SpeechEmbeddingSequence speech;
  std::vector<int> text;
  std::vector<int> positions;
  std::vector<int> targets;
};

double gradcheck_loss(const GradCheckSetup& s) {
  const JointInput joint = compose(s.speech, s.text, s.params);
  const AttentionMask mask = mask_for(joint);
  const Tensor hidden = forward(joint, s.params, mask);
  const Tensor logits = mlm_logits(hidden, s.params);
  return cross_entropy_masked(logits, s.targets, s.positions).item();
}

VerifyResult gradcheck_over(GradCheckSetup& s, const std::string& name) {
  VerifyResult res;
  res.name = name;

  zero_grads(s.params.all());
  {
    const JointInput joint = compose(s.speech, s.text, s.params);
    const AttentionMask mask = mask_for(joint);
    const Tensor hidden = forward(joint, s.params, mask);
    const Tensor logits = mlm_logits(hidden, s.params);
    const Tensor loss = cross_entropy_masked(logits, s.targets, s.positions);
    backward(loss);
  }

  const double h = 1e-5;
  double max_rel = 0.0;
  std::size_t checked = 0;
  NoGradGuard ng;
  for (Parameter* p : s.params.all()) {
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      const double keep = (*p->value.data)[i];
      (*p->value.data)[i] = keep + h;
      const double lp = gradcheck_loss(s);
      (*p->value.data)[i] = keep - h;
      const double lm = gradcheck_loss(s);
      (*p->value.data)[i] = keep;
      const double fd = (lp - lm) / (2.0 * h);
      const double ad = (*p->value.grad)[i];
      const double rel = std::abs(ad - fd) / std::max({std::abs(ad), std::abs(fd), 1e-3});
      if (rel > max_rel) max_rel = rel;
      ++checked;
    }
  }
  res.pass = max_rel < 1e-4;
  res.detail = std::to_string(checked) + " coords, max rel err " + fmt("%.3e", max_rel);
  return res;
}

}  // namespace

VerifyResult verify_gradcheck(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.n_layers = 2;
  cfg.n_heads = 2;
  cfg.d_model = 32;
  cfg.d_ff = 64;
  cfg.vocab_size = 12;
  cfg.d_speech = 8;
  cfg.max_frames = 4;
  cfg.max_text = 5;

  Rng rng(mix_seed(seed, 0x6001));
  GradCheckSetup s;
  s.params = ModelParams::init(cfg, rng, 0.2);
  s.speech = random_speech(3, cfg.d_speech, rng);
  s.text = random_text(4, cfg.vocab_size, rng);
  s.text[1] = Vocabulary::kMask;
  s.text[3] = Vocabulary::kMask;
  const JointInput joint = compose(s.speech, s.text, s.params);
  s.positions = {joint.text_begin() + 1, joint.text_begin() + 3, joint.eos_pos() - 1};
  s.targets = {8, 9, Vocabulary::kEos};
  return gradcheck_over(s, "gradcheck d_model=32 (" + std::to_string(s.params.num_params()) +
                               " params)");
}

VerifyResult verify_gradcheck_small(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.n_layers = 2;
  cfg.n_heads = 2;
  cfg.d_model = 16;
  cfg.d_ff = 32;
  cfg.vocab_size = 9;
  cfg.d_speech = 8;
  cfg.max_frames = 3;
  cfg.max_text = 5;

  Rng rng(mix_seed(seed, 0x6002));
  GradCheckSetup s;
  s.params = ModelParams::init(cfg, rng, 0.2);
  s.speech = random_speech(3, cfg.d_speech, rng);
  s.text = random_text(3, cfg.vocab_size, rng);
  s.text[0] = Vocabulary::kMask;
  const JointInput joint = compose(s.speech, s.text, s.params);
  s.positions = {joint.text_begin(), joint.text_begin() + 2};
  s.targets = {7, 8};
  VerifyResult res = gradcheck_over(
      s, "gradcheck <=5k params (" + std::to_string(s.params.num_params()) + " params)");
  if (s.params.num_params() > 5000) {
    res.pass = false;
    res.detail += "; model exceeds 5k parameters";
  }
  return res;
}

namespace {

ModelConfig random_small_cfg(Rng& rng, int min_text = 4) {
  ModelConfig cfg;
  cfg.n_layers = 1 + static_cast<int>(rng.below(2));
  cfg.d_model = 8 * (1 + static_cast<int>(rng.below(2)));  // 8 or 16
  const int heads[] = {1, 2, 4};
  cfg.n_heads = heads[rng.below(3)];
  cfg.d_ff = 16 * (1 + static_cast<int>(rng.below(2)));
  cfg.vocab_size = 10 + static_cast<int>(rng.below(12));
  cfg.d_speech = 8;
  cfg.max_frames = 3 + static_cast<int>(rng.below(4));
  cfg.max_text = min_text + static_cast<int>(rng.below(4));
  return cfg;
}

bool rows_equal(const Tensor& a, const Tensor& b, int row_begin, int row_end) {
  const int n = a.cols();
  return std::memcmp(a.ptr() + static_cast<std::size_t>(row_begin) * n,
                     b.ptr() + static_cast<std::size_t>(row_begin) * n,
                     sizeof(double) * static_cast<std::size_t>(row_end - row_begin) * n) == 0;
}

}  // namespace

VerifyResult verify_mask_causality(int trials, std::uint64_t seed) {
  VerifyResult res;
  res.name = "mask causality (" + std::to_string(trials) + " trials)";
  int failures = 0;
  NoGradGuard ng;

  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(mix_seed(seed, 0x6101, static_cast<std::uint64_t>(trial)));
    const ModelConfig cfg = random_small_cfg(rng);
    const ModelParams params = ModelParams::init(cfg, rng, 0.4);
    const SpeechEmbeddingSequence speech =
        random_speech(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_frames + 2))),
                      cfg.d_speech, rng);
    const int m = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_text - 1)));
    std::vector<int> text = random_text(m, cfg.vocab_size, rng);

    const JointInput joint = compose(speech, text, params);
    const AttentionMask mask = mask_for(joint);
    const Tensor hidden = forward(joint, params, mask);
    const Tensor logits = mlm_logits(hidden, params);
    const int mk = joint.n_text;  // tokens kept after trimming

    // (a) mutating a text token after position t leaves logits at joint
    // positions <= text_begin+t unchanged
    if (mk >= 2) {
      const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(mk - 1)));
      const int p = t + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(mk - t - 1)));
      std::vector<int> text2 = text;
      text2[static_cast<std::size_t>(p)] =
          text2[static_cast<std::size_t>(p)] == cfg.vocab_size - 1 ? Vocabulary::kNumSpecials
                                                                   : text2[static_cast<std::size_t>(p)] + 1;
      const JointInput j2 = compose(speech, text2, params);
      const Tensor l2 = mlm_logits(forward(j2, params, mask_for(j2)), params);
      if (!rows_equal(logits, l2, 0, joint.text_begin() + t + 1)) ++failures;
    }

    // (b) mutating any text token leaves all speech-part hidden states unchanged
    {
      const int p = static_cast<int>(rng.below(static_cast<std::uint64_t>(mk)));
      std::vector<int> text2 = text;
      text2[static_cast<std::size_t>(p)] =
          text2[static_cast<std::size_t>(p)] == cfg.vocab_size - 1 ? Vocabulary::kNumSpecials
                                                                   : text2[static_cast<std::size_t>(p)] + 1;
      const JointInput j2 = compose(speech, text2, params);
      const Tensor h2 = forward(j2, params, mask_for(j2));
      if (!rows_equal(hidden, h2, 0, joint.sep_pos() + 1)) ++failures;
    }

    // (c) pad content changes nothing at non-pad positions
    {
      JointInput j2 = joint;
      j2.embeddings = Tensor::from(joint.embeddings.shape, *joint.embeddings.data);
      bool has_pad = false;
      for (int i = joint.eos_pos() + 1; i < joint.length(); ++i) {
        has_pad = true;
        for (int c = 0; c < cfg.d_model; ++c) j2.embeddings.at(i, c) = rng.normal(0.0, 3.0);
      }
      if (has_pad) {
        const Tensor h2 = forward(j2, params, mask_for(j2));
        if (!rows_equal(hidden, h2, 0, joint.eos_pos() + 1)) ++failures;
      }
    }
  }
  res.pass = failures == 0;
  res.detail = std::to_string(failures) + " failures";
  return res;
}

VerifyResult verify_teacher_forcing(int sequences, std::uint64_t seed) {
  VerifyResult res;
  res.name = "teacher-forcing equivalence (" + std::to_string(sequences) + " sequences)";
  int failures = 0;

  for (int trial = 0; trial < sequences; ++trial) {
    Rng rng(mix_seed(seed, 0x6202, static_cast<std::uint64_t>(trial)));
    const ModelConfig cfg = random_small_cfg(rng);
    const ModelParams params = ModelParams::init(cfg, rng, 0.4);
    const SpeechEmbeddingSequence speech =
        random_speech(2 + static_cast<int>(rng.below(3)), cfg.d_speech, rng);

    // Greedy generation, recording every step distribution.
    std::vector<std::vector<double>> step_logps;
    std::vector<int> y;
    bool finished = false;
    while (static_cast<int>(y.size()) + 1 <= cfg.max_text - 1 && !finished) {
      std::vector<double> d = step_distribution(speech, y, params);
      step_logps.push_back(d);
      int best = 0;
      for (int v = 1; v < static_cast<int>(d.size()); ++v)
        if (d[static_cast<std::size_t>(v)] > d[static_cast<std::size_t>(best)]) best = v;
      if (best == Vocabulary::kEos) finished = true;
      else y.push_back(best);
    }

    // Re-score: [MASK] substituted at position t of the final sequence, all
    // later tokens present in the input.
    for (std::size_t t = 0; t < step_logps.size(); ++t) {
      std::vector<int> text = y;
      if (t < y.size()) text[t] = Vocabulary::kMask;
      else text.push_back(Vocabulary::kMask);
      const std::vector<double> d2 = distribution_at(speech, text, static_cast<int>(t), params);
      if (d2.size() != step_logps[t].size() ||
          std::memcmp(d2.data(), step_logps[t].data(), d2.size() * sizeof(double)) != 0)
        ++failures;
    }
  }
  res.pass = failures == 0;
  res.detail = std::to_string(failures) + " mismatching steps";
  return res;
}

namespace {

struct EnumBest {
  double logprob = -kInf;
  std::vector<int> tokens;
  bool set = false;

  void offer(double lp, const std::vector<int>& toks) {
    if (!set || lp > logprob || (lp == logprob && toks < tokens)) {
      logprob = lp;
      tokens = toks;
      set = true;
    }
  }
};

void enumerate_sequences(const StepFn& step, int eos_id, int max_len, std::vector<int>& prefix,
                         double lp, EnumBest* best) {
  if (static_cast<int>(prefix.size()) == max_len) {
    best->offer(lp, prefix);
    return;
  }
  const std::vector<double> d = step(prefix);
  for (int v = 0; v < static_cast<int>(d.size()); ++v) {
    const double p = d[static_cast<std::size_t>(v)];
    if (p == -kInf) continue;
    if (v == eos_id) {
      best->offer(lp + p, prefix);
    } else {
      prefix.push_back(v);
      enumerate_sequences(step, eos_id, max_len, prefix, lp + p, best);
      prefix.pop_back();
    }
  }
}

}  // namespace

VerifyResult verify_beam_oracle(int trials, std::uint64_t seed) {
  VerifyResult res;
  res.name = "full-width beam vs exhaustive search (" + std::to_string(trials) + " trials)";
  int failures = 0;

  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(mix_seed(seed, 0x6303, static_cast<std::uint64_t>(trial)));
    ModelConfig cfg = random_small_cfg(rng);
    cfg.vocab_size = 12 + static_cast<int>(rng.below(3));  // 5-7 words + EOS + SLU branches
    cfg.max_text = 6;
    const ModelParams params = ModelParams::init(cfg, rng, 0.6);
    const SpeechEmbeddingSequence speech = random_speech(2, cfg.d_speech, rng);
    const int max_len = 2 + static_cast<int>(rng.below(3));  // 2..4

    const StepFn step = make_step_fn(speech, params);
    EnumBest best;
    std::vector<int> prefix;
    enumerate_sequences(step, Vocabulary::kEos, max_len, prefix, 0.0, &best);

    const std::vector<Hypothesis> beams = beam_core(step, Vocabulary::kEos, max_len, 4096);
    if (beams.empty() || beams[0].logprob != best.logprob || beams[0].token_ids != best.tokens)
      ++failures;
  }
  res.pass = failures == 0;
  res.detail = std::to_string(failures) + " mismatches";
  return res;
}

VerifyResult verify_beam_greedy(int trials, std::uint64_t seed) {
  VerifyResult res;
  res.name = "beam_size=1 equals greedy (" + std::to_string(trials) + " trials)";
  int failures = 0;

  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(mix_seed(seed, 0x6404, static_cast<std::uint64_t>(trial)));
    const ModelConfig cfg = random_small_cfg(rng);
    const ModelParams params = ModelParams::init(cfg, rng, 0.5);
    const SpeechEmbeddingSequence speech = random_speech(3, cfg.d_speech, rng);

    DecodeConfig dc;
    dc.beam_size = 1;
    dc.max_len = cfg.max_text - 1;
    const Hypothesis g = greedy_generate(speech, params, dc);
    const BeamResult b = beam_generate(speech, params, dc);
    if (g.token_ids != b.best.token_ids || g.logprob != b.best.logprob) ++failures;
  }
  res.pass = failures == 0;
  res.detail = std::to_string(failures) + " mismatches";
  return res;
}

VerifyResult verify_masking_stats(long long min_draws, std::uint64_t seed) {
  VerifyResult res;
  MaskingPolicy policy;
  Vocabulary vocab;
  for (const std::string& s : Vocabulary::special_strings()) {
    vocab.index[s] = vocab.size();
    vocab.tokens.push_back(s);
  }
  for (int i = 0; i < 33; ++i) {
    vocab.index["w" + std::to_string(i)] = vocab.size();
    vocab.tokens.push_back("w" + std::to_string(i));
  }

  Rng rng(mix_seed(seed, 0x6505));
  long long spans[4] = {0, 0, 0, 0};
  long long kinds[3] = {0, 0, 0};
  long long n_spans = 0, n_kinds = 0;
  const std::vector<int> text(20, 10);
  while (n_spans < min_draws || n_kinds < min_draws) {
    const MaskingResult mr = apply_masking(text, policy, rng, vocab);
    for (int s : mr.drawn_span_lengths) {
      spans[s] += 1;
      ++n_spans;
    }
    for (int k : mr.replace_kinds) {
      kinds[k] += 1;
      ++n_kinds;
    }
  }

  const double uni = 100.0 * spans[1] / n_spans;
  const double bi = 100.0 * spans[2] / n_spans;
  const double tri = 100.0 * spans[3] / n_spans;
  const double pm = 100.0 * kinds[0] / n_kinds;
  const double pr = 100.0 * kinds[1] / n_kinds;
  const double pk = 100.0 * kinds[2] / n_kinds;

  res.name = "masking statistics (" + std::to_string(n_spans) + " span draws, " +
             std::to_string(n_kinds) + " replacements)";
  res.pass = std::abs(uni - 80.0) <= 1.0 && std::abs(bi - 10.0) <= 1.0 &&
             std::abs(tri - 10.0) <= 1.0 && std::abs(pm - 80.0) <= 1.0 &&
             std::abs(pr - 10.0) <= 1.0 && std::abs(pk - 10.0) <= 1.0;
  res.detail = "spans " + fmt("%.2f", uni) + "/" + fmt("%.2f", bi) + "/" + fmt("%.2f", tri) +
               ", replacements " + fmt("%.2f", pm) + "/" + fmt("%.2f", pr) + "/" +
               fmt("%.2f", pk);
  return res;
}

namespace {

SemanticFrame random_frame(const std::vector<std::string>& intents,
                           const std::vector<std::string>& types,
                           const std::vector<std::string>& words, Rng& rng, int max_slots = 4) {
  SemanticFrame f;
  f.intents.push_back(intents[rng.below(intents.size())]);
  if (rng.uniform() < 0.2) {
    std::string second = intents[rng.below(intents.size())];
    if (second != f.intents[0]) f.intents.push_back(second);
  }
  const int n_slots = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_slots + 1)));
  for (int s = 0; s < n_slots; ++s) {
    std::string value = words[rng.below(words.size())];
    if (rng.uniform() < 0.3) value += " " + words[rng.below(words.size())];
    f.slots.emplace_back(types[rng.below(types.size())], value);
  }
  return f;
}

}  // namespace

VerifyResult verify_codec_roundtrip(int n, std::uint64_t seed) {
  VerifyResult res;
  res.name = "parse(linearize) identity (" + std::to_string(n) + " frames)";
  const std::vector<std::string> intents = {"flight_info", "airfare", "ground_service",
                                            "flight_time", "airline_info", "distance"};
  const std::vector<std::string> types = {"from_city", "to_city", "depart_date",
                                          "depart_time", "airline", "class_type"};
  const std::vector<std::string> words = {"boston", "denver", "monday", "morning",
                                          "delta",  "first",  "coach",  "tuesday"};
  std::set<std::string> intent_set(intents.begin(), intents.end());
  std::set<std::string> type_set(types.begin(), types.end());

  Rng rng(mix_seed(seed, 0x6606));
  int failures = 0;
  for (int i = 0; i < n; ++i) {
    const SemanticFrame f = random_frame(intents, types, words, rng);
    const FrameParse back = parse_frame(linearize(f), intent_set, type_set);
    if (!(back.frame == f) || !back.anomalies.empty()) ++failures;
  }
  res.pass = failures == 0;
  res.detail = std::to_string(failures) + " round-trip failures";
  return res;
}

namespace {

// Independent full-matrix Levenshtein (the library uses two rolling rows).
long long edit_distance_oracle(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<std::vector<long long>> dp(m + 1, std::vector<long long>(n + 1, 0));
  for (std::size_t i = 0; i <= m; ++i) dp[i][0] = static_cast<long long>(i);
  for (std::size_t j = 0; j <= n; ++j) dp[0][j] = static_cast<long long>(j);
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      const long long del = dp[i - 1][j] + 1;
      const long long ins = dp[i][j - 1] + 1;
      const long long sub = dp[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      dp[i][j] = std::min({del, ins, sub});
    }
  return dp[m][n];
}

}  // namespace

VerifyResult verify_wer_oracle(int n, std::uint64_t seed) {
  VerifyResult res;
  res.name = "wer vs independent DP oracle (" + std::to_string(n) + " pairs)";
  const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e"};
  Rng rng(mix_seed(seed, 0x6707));
  int failures = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> ref, hyp;
    const int rl = 1 + static_cast<int>(rng.below(12));
    const int hl = static_cast<int>(rng.below(13));
    for (int j = 0; j < rl; ++j) ref.push_back(alphabet[rng.below(alphabet.size())]);
    for (int j = 0; j < hl; ++j) hyp.push_back(alphabet[rng.below(alphabet.size())]);
    const double expect =
        static_cast<double>(edit_distance_oracle(ref, hyp)) / static_cast<double>(ref.size());
    if (wer(ref, hyp) != expect) ++failures;
  }
  res.pass = failures == 0;
  res.detail = std::to_string(failures) + " mismatches";
  return res;
}

VerifyResult verify_score_oracle(int trials, std::uint64_t seed) {
  VerifyResult res;
  res.name = "slot metrics vs counting oracle (" + std::to_string(trials) + " corpora)";
  const std::vector<std::string> intents = {"i1", "i2", "i3"};
  const std::vector<std::string> types = {"t1", "t2", "t3"};
  const std::vector<std::string> words = {"x", "y", "z", "w"};

  Rng rng(mix_seed(seed, 0x6808));
  int failures = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(40));
    std::vector<SemanticFrame> refs, hyps;
    for (int i = 0; i < n; ++i) {
      refs.push_back(random_frame(intents, types, words, rng, 3));
      hyps.push_back(random_frame(intents, types, words, rng, 3));
    }
    const EvalReport r = score(refs, hyps);

    // Greedy one-by-one matching of hyp slots against unused ref slots.
    long long match = 0, nref = 0, nhyp = 0, intent_ok = 0;
    for (int i = 0; i < n; ++i) {
      std::vector<bool> used(refs[static_cast<std::size_t>(i)].slots.size(), false);
      nref += static_cast<long long>(refs[static_cast<std::size_t>(i)].slots.size());
      nhyp += static_cast<long long>(hyps[static_cast<std::size_t>(i)].slots.size());
      for (const auto& hs : hyps[static_cast<std::size_t>(i)].slots)
        for (std::size_t k = 0; k < used.size(); ++k)
          if (!used[k] && refs[static_cast<std::size_t>(i)].slots[k] == hs) {
            used[k] = true;
            ++match;
            break;
          }
      std::set<std::string> a(refs[static_cast<std::size_t>(i)].intents.begin(),
                              refs[static_cast<std::size_t>(i)].intents.end());
      std::set<std::string> b(hyps[static_cast<std::size_t>(i)].intents.begin(),
                              hyps[static_cast<std::size_t>(i)].intents.end());
      if (a == b) ++intent_ok;
    }
    const double prec = nhyp > 0 ? static_cast<double>(match) / nhyp : 0.0;
    const double rec = nref > 0 ? static_cast<double>(match) / nref : 0.0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    const double acc = static_cast<double>(intent_ok) / n;

    const bool ok = std::abs(r.intent_acc - acc) <= 1e-12 && r.matched_slots == match &&
                    (!r.has_slots || (std::abs(r.slot_precision - prec) <= 1e-12 &&
                                      std::abs(r.slot_recall - rec) <= 1e-12 &&
                                      std::abs(r.slot_f1 - f1) <= 1e-12));
    if (!ok) ++failures;
  }
  res.pass = failures == 0;
  res.detail = std::to_string(failures) + " mismatches";
  return res;
}

std::vector<VerifyResult> verify_all(std::uint64_t seed) {
  std::vector<VerifyResult> out;
  out.push_back(verify_gradcheck(seed));
  out.push_back(verify_gradcheck_small(seed));
  out.push_back(verify_mask_causality(200, seed));
  out.push_back(verify_teacher_forcing(50, seed));
  out.push_back(verify_beam_oracle(100, seed));
  out.push_back(verify_beam_greedy(100, seed));
  out.push_back(verify_masking_stats(100000, seed));
  out.push_back(verify_codec_roundtrip(10000, seed));
  out.push_back(verify_wer_oracle(1000, seed));
  out.push_back(verify_score_oracle(25, seed));
  return out;
}

}  // namespace slp

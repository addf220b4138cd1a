#include "slp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "slp/kernels.hpp"
#include "slp/ops.hpp"

namespace slp {

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::kPretrainAsr: return "pretrain";
    case Regime::kFinetuneSlu: return "finetune";
    case Regime::kOnestepSlu: return "onestep-slu";
    case Regime::kOnestepAsrSlu: return "onestep-asr-slu";
  }
  throw std::runtime_error("regime_name: bad regime");
}

Regime regime_from_name(const std::string& name) {
  if (name == "pretrain") return Regime::kPretrainAsr;
  if (name == "finetune") return Regime::kFinetuneSlu;
  if (name == "onestep-slu") return Regime::kOnestepSlu;
  if (name == "onestep-asr-slu") return Regime::kOnestepAsrSlu;
  throw std::runtime_error("unknown regime '" + name + "'");
}

void MaskingPolicy::validate() const {
  const double rsum = replace_mask_p + replace_random_p + keep_original_p;
  if (std::abs(rsum - 1.0) > 1e-9)
    throw std::runtime_error("masking policy: replacement probabilities sum to " +
                             std::to_string(rsum));
  if (std::abs(unigram_p + multigram_p - 1.0) > 1e-9)
    throw std::runtime_error("masking policy: span probabilities do not sum to 1");
  if (mask_rate <= 0.0 || mask_rate >= 1.0)
    throw std::runtime_error("masking policy: mask_rate must be in (0,1)");
}

void TrainConfig::validate() const {
  if (batch_size < 1 || epochs < 0 || lr <= 0.0)
    throw std::runtime_error("train config: non-positive batch_size/epochs/lr");
}

namespace {

bool maskable_id(int id) {
  return id == Vocabulary::kUnk || id >= Vocabulary::kNumSpecials;
}

}  // namespace

MaskingResult apply_masking(const std::vector<int>& text_ids, const MaskingPolicy& policy,
                            Rng& rng, const Vocabulary& vocab) {
  policy.validate();
  const int n = static_cast<int>(text_ids.size());
  if (n < 1) throw std::runtime_error("apply_masking: empty sequence");

  MaskingResult res;
  res.corrupted = text_ids;

  int n_maskable = 0;
  for (int id : text_ids) n_maskable += maskable_id(id) ? 1 : 0;
  const int budget =
      std::min(n_maskable, static_cast<int>(std::ceil(policy.mask_rate * n)));
  if (budget == 0) return res;

  std::vector<char> selected(static_cast<std::size_t>(n), 0);
  auto span_free = [&](int start, int len) {
    if (start < 0 || start + len > n) return false;
    for (int i = start; i < start + len; ++i)
      if (selected[static_cast<std::size_t>(i)] || !maskable_id(text_ids[static_cast<std::size_t>(i)]))
        return false;
    return true;
  };

  int remaining = budget;
  while (remaining > 0) {
    int span = 1;
    if (rng.uniform() >= policy.unigram_p) span = rng.uniform() < 0.5 ? 2 : 3;
    res.drawn_span_lengths.push_back(span);
    const int len = std::min(span, remaining);

    int placed_at = -1;
    for (int attempt = 0; attempt < 64 && placed_at < 0; ++attempt) {
      const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - len + 1)));
      if (span_free(start, len)) placed_at = start;
    }
    if (placed_at < 0) {
      // Dense fallback: first fitting window, then any free single position.
      for (int start = 0; start + len <= n && placed_at < 0; ++start)
        if (span_free(start, len)) placed_at = start;
      if (placed_at < 0) {
        int single = -1;
        for (int i = 0; i < n && single < 0; ++i)
          if (!selected[static_cast<std::size_t>(i)] && maskable_id(text_ids[static_cast<std::size_t>(i)]))
            single = i;
        if (single < 0) break;  // budget cannot be met
        selected[static_cast<std::size_t>(single)] = 1;
        remaining -= 1;
        continue;
      }
    }
    for (int i = placed_at; i < placed_at + len; ++i) selected[static_cast<std::size_t>(i)] = 1;
    remaining -= len;
  }

  for (int i = 0; i < n; ++i) {
    if (!selected[static_cast<std::size_t>(i)]) continue;
    res.positions.push_back(i);
    res.target_ids.push_back(text_ids[static_cast<std::size_t>(i)]);
    const double u = rng.uniform();
    int kind = 2;
    if (u < policy.replace_mask_p) kind = 0;
    else if (u < policy.replace_mask_p + policy.replace_random_p) kind = 1;
    res.replace_kinds.push_back(kind);
    if (kind == 0) {
      res.corrupted[static_cast<std::size_t>(i)] = Vocabulary::kMask;
    } else if (kind == 1) {
      const int span_ids = vocab.size() - Vocabulary::kNumSpecials;
      if (span_ids > 0)
        res.corrupted[static_cast<std::size_t>(i)] =
            Vocabulary::kNumSpecials + static_cast<int>(rng.below(static_cast<std::uint64_t>(span_ids)));
    }
  }
  return res;
}

std::vector<TrainingExample> build_examples(const Manifest& manifest, const Vocabulary& vocab,
                                            Regime regime) {
  namespace fs = std::filesystem;
  std::vector<TrainingExample> out;
  out.reserve(manifest.records.size());
  for (const ManifestRecord& r : manifest.records) {
    TrainingExample ex;
    ex.speech.source_id = r.id;
    ex.speech.frames = read_embeddings((fs::path(manifest.dir) / r.embedding_path).string());
    switch (regime) {
      case Regime::kPretrainAsr:
        ex.target_text = tokenize(r.transcript, vocab);
        break;
      case Regime::kFinetuneSlu:
      case Regime::kOnestepSlu:
        ex.target_text = tokenize(linearize(r.frame), vocab);
        break;
      case Regime::kOnestepAsrSlu: {
        ex.target_text = tokenize(r.transcript, vocab);
        ex.target_text.push_back(Vocabulary::kSlu);
        const std::vector<int> slu = tokenize(linearize(r.frame), vocab);
        ex.target_text.insert(ex.target_text.end(), slu.begin(), slu.end());
        break;
      }
    }
    if (ex.target_text.empty())
      throw std::runtime_error("build_examples: empty target for utterance " + r.id);
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

struct ExampleWork {
  double loss = 0.0;
  long long count = 0;
  bool skipped = false;
  ModelParams view;
};

void run_example(const TrainingExample& ex, std::uint64_t seed, const ModelParams& params,
                 const MaskingPolicy& policy, const Vocabulary& vocab, ExampleWork* work) {
  Rng rng(seed);
  MaskingResult mr = apply_masking(ex.target_text, policy, rng, vocab);
  if (mr.positions.empty()) mr = apply_masking(ex.target_text, policy, rng, vocab);
  if (mr.positions.empty()) {
    work->skipped = true;
    return;
  }

  work->view = params.grad_view();

  // The appended [MASK] occupies the slot where [EOS] will be chosen at
  // inference time; its target teaches the model to stop.
  std::vector<int> text = mr.corrupted;
  const int m = static_cast<int>(text.size());
  text.push_back(Vocabulary::kMask);

  const JointInput joint = compose(ex.speech, text, work->view);
  const AttentionMask mask = mask_for(joint);
  const Tensor hidden = forward(joint, work->view, mask);

  std::vector<int> positions, targets;
  for (std::size_t i = 0; i < mr.positions.size(); ++i) {
    if (mr.positions[i] < joint.n_text) {
      positions.push_back(joint.text_begin() + mr.positions[i]);
      targets.push_back(mr.target_ids[i]);
    }
  }
  if (m < params.cfg.max_text) {
    positions.push_back(joint.text_begin() + m);
    targets.push_back(Vocabulary::kEos);
  }
  if (positions.empty()) {
    work->skipped = true;
    return;
  }

  // project only the supervised rows through the vocabulary head
  const Tensor picked = embedding_lookup(hidden, positions);
  const Tensor logits = mlm_logits(picked, work->view);
  std::vector<int> local(positions.size());
  for (std::size_t i = 0; i < local.size(); ++i) local[i] = static_cast<int>(i);
  const Tensor loss = cross_entropy_masked(logits, targets, local);
  backward(loss);
  work->loss = loss.item();
  work->count = static_cast<long long>(positions.size());
}

}  // namespace

StepStats training_step(const std::vector<const TrainingExample*>& batch,
                        const std::vector<std::uint64_t>& example_seeds, ModelParams& params,
                        AdamOptimizer& adam, const MaskingPolicy& policy,
                        const Vocabulary& vocab, double grad_clip) {
  if (batch.empty()) throw std::runtime_error("training_step: empty batch");
  if (batch.size() != example_seeds.size())
    throw std::runtime_error("training_step: seed count mismatch");

  const int B = static_cast<int>(batch.size());
  std::vector<ExampleWork> work(static_cast<std::size_t>(B));
#pragma omp parallel for schedule(dynamic) if (B > 1)
  for (int e = 0; e < B; ++e)
    run_example(*batch[static_cast<std::size_t>(e)], example_seeds[static_cast<std::size_t>(e)],
                params, policy, vocab, &work[static_cast<std::size_t>(e)]);

  StepStats stats;
  std::vector<Parameter*> master = params.all();
  zero_grads(master);
  double loss_sum = 0.0;
  for (int e = 0; e < B; ++e) {
    ExampleWork& w = work[static_cast<std::size_t>(e)];
    if (w.skipped) {
      stats.skipped_examples += 1;
      continue;
    }
    loss_sum += w.loss;
    stats.positions += w.count;
    std::vector<Parameter*> view = w.view.all();
    for (std::size_t p = 0; p < master.size(); ++p)
      kernels::ref::axpy(master[p]->value.numel(), 1.0, view[p]->value.gptr(),
                         master[p]->value.grad->data());
  }
  if (stats.positions == 0) return stats;

  const double inv = 1.0 / static_cast<double>(stats.positions);
  for (Parameter* p : master)
    kernels::ref::scale(p->value.numel(), p->value.gptr(), inv, p->value.grad->data());

  if (grad_clip > 0.0) {
    double norm2 = 0.0;
    for (Parameter* p : master)
      for (std::size_t i = 0; i < p->value.numel(); ++i) {
        const double g = (*p->value.grad)[i];
        norm2 += g * g;
      }
    const double norm = std::sqrt(norm2);
    if (norm > grad_clip) {
      const double s = grad_clip / norm;
      for (Parameter* p : master)
        kernels::ref::scale(p->value.numel(), p->value.gptr(), s, p->value.grad->data());
    }
  }
  adam.step_all(master);
  stats.loss = loss_sum * inv;
  return stats;
}

RegimeResult run_regime(const std::vector<TrainingExample>& dataset, ModelParams& params,
                        const MaskingPolicy& policy, const TrainConfig& cfg,
                        const Vocabulary& vocab) {
  cfg.validate();
  if (dataset.empty()) throw std::runtime_error("run_regime: empty dataset");

  AdamOptimizer adam({cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps});
  std::vector<Parameter*> plist = params.all();
  adam.init(plist);

  RegimeResult res;
  const int N = static_cast<int>(dataset.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<int> order(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng shuffle_rng(mix_seed(cfg.seed, 0x45504F43ull, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    long long epoch_positions = 0;
    int step = 0;
    for (int at = 0; at < N; at += cfg.batch_size) {
      const int end = std::min(N, at + cfg.batch_size);
      std::vector<const TrainingExample*> batch;
      std::vector<std::uint64_t> seeds;
      for (int i = at; i < end; ++i) {
        const int idx = order[static_cast<std::size_t>(i)];
        batch.push_back(&dataset[static_cast<std::size_t>(idx)]);
        seeds.push_back(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch),
                                 static_cast<std::uint64_t>(idx)));
      }
      const StepStats st = training_step(batch, seeds, params, adam, policy, vocab, cfg.grad_clip);
      ++step;
      char line[96];
      std::snprintf(line, sizeof(line), "epoch %d step %d loss %.6f\n", epoch, step, st.loss);
      res.loss_log += line;
      epoch_loss += st.loss * static_cast<double>(st.positions);
      epoch_positions += st.positions;
    }
    res.epoch_mean_loss.push_back(
        epoch_positions > 0 ? epoch_loss / static_cast<double>(epoch_positions) : 0.0);
  }
  return res;
}

}  // namespace slp

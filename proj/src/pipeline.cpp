#include "slp/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace fs = std::filesystem;

namespace slp {

RunConfig::RunConfig() {
  kv_ = {
      {"seed", "1"},
      {"model.n_layers", "2"},
      {"model.n_heads", "4"},
      {"model.d_model", "64"},
      {"model.d_ff", "256"},
      {"model.d_speech", "32"},
      {"model.max_frames", "64"},
      {"model.max_text", "24"},
      {"train.batch_size", "16"},
      {"train.lr", "0.001"},
      {"train.epochs", "10"},
      {"train.beta1", "0.9"},
      {"train.beta2", "0.999"},
      {"train.adam_eps", "1e-8"},
      {"train.grad_clip", "0"},
      {"mask.rate", "0.15"},
      {"mask.replace_mask_p", "0.8"},
      {"mask.replace_random_p", "0.1"},
      {"mask.keep_original_p", "0.1"},
      {"mask.unigram_p", "0.8"},
      {"mask.multigram_p", "0.2"},
      {"decode.beam_size", "4"},
      {"decode.max_len", "0"},  // 0: use max_text
      {"encoder.frames_per_char_min", "2"},
      {"encoder.frames_per_char_max", "4"},
      {"encoder.jitter_std", "0.05"},
      {"corpus.grammar", "fsc-like"},
      {"corpus.n_train", "2000"},
      {"corpus.n_dev", "200"},
      {"corpus.n_test", "200"},
      {"vocab.size", "384"},
      {"vocab.min_freq", "1"},
  };
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw usage_error("unknown config key '" + key + "'");
  it->second = value;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string trimmed;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
    if (trimmed.empty()) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    set(trimmed.substr(0, eq), trimmed.substr(eq + 1));
  }
}

int RunConfig::geti(const std::string& key) const { return std::stoi(gets(key)); }
double RunConfig::getf(const std::string& key) const { return std::stod(gets(key)); }
std::uint64_t RunConfig::getu(const std::string& key) const { return std::stoull(gets(key)); }

const std::string& RunConfig::gets(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw usage_error("unknown config key '" + key + "'");
  return it->second;
}

std::string RunConfig::resolved() const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    if (!out.empty()) out += " ";
    out += k + "=" + v;
  }
  return out;
}

ModelConfig RunConfig::model_config(int vocab_size) const {
  ModelConfig c;
  c.n_layers = geti("model.n_layers");
  c.n_heads = geti("model.n_heads");
  c.d_model = geti("model.d_model");
  c.d_ff = geti("model.d_ff");
  c.d_speech = geti("model.d_speech");
  c.max_frames = geti("model.max_frames");
  c.max_text = geti("model.max_text");
  c.vocab_size = vocab_size;
  c.validate();
  return c;
}

TrainConfig RunConfig::train_config(Regime regime) const {
  TrainConfig t;
  t.batch_size = geti("train.batch_size");
  t.lr = getf("train.lr");
  t.epochs = geti("train.epochs");
  t.seed = getu("seed");
  t.regime = regime;
  t.beta1 = getf("train.beta1");
  t.beta2 = getf("train.beta2");
  t.adam_eps = getf("train.adam_eps");
  t.grad_clip = getf("train.grad_clip");
  t.validate();
  return t;
}

MaskingPolicy RunConfig::masking_policy() const {
  MaskingPolicy p;
  p.mask_rate = getf("mask.rate");
  p.replace_mask_p = getf("mask.replace_mask_p");
  p.replace_random_p = getf("mask.replace_random_p");
  p.keep_original_p = getf("mask.keep_original_p");
  p.unigram_p = getf("mask.unigram_p");
  p.multigram_p = getf("mask.multigram_p");
  p.validate();
  return p;
}

PseudoEncoderConfig RunConfig::encoder_config() const {
  PseudoEncoderConfig e;
  e.d_speech = geti("model.d_speech");
  e.min_frames_per_char = geti("encoder.frames_per_char_min");
  e.max_frames_per_char = geti("encoder.frames_per_char_max");
  e.jitter_std = getf("encoder.jitter_std");
  e.seed = getu("seed");
  return e;
}

DecodeConfig RunConfig::decode_config(DecodeMode mode, DecodeOutput output) const {
  DecodeConfig d;
  d.mode = mode;
  d.output = output;
  d.beam_size = geti("decode.beam_size");
  d.max_len = geti("decode.max_len");  // 0: resolved against the checkpoint
  return d;
}

GenDataResult run_gen_data(const RunConfig& cfg, const std::string& out_dir) {
  const std::string grammar_name = cfg.gets("corpus.grammar");
  TemplateGrammar grammar;
  if (grammar_name == "fsc-like") grammar = fsc_like_grammar();
  else if (grammar_name == "atis-like") grammar = atis_like_grammar();
  else throw usage_error("unknown grammar '" + grammar_name + "'");

  GenDataResult res;
  res.stats = generate_corpus(grammar, cfg.geti("corpus.n_train"), cfg.geti("corpus.n_dev"),
                              cfg.geti("corpus.n_test"), cfg.encoder_config(), cfg.getu("seed"),
                              out_dir);
  return res;
}

void run_build_vocab(const std::string& manifest_path, int target_size, int min_freq,
                     const std::string& out_path) {
  const Manifest m = load_manifest(manifest_path, false);
  if (m.records.empty()) throw std::runtime_error("build-vocab: empty manifest");
  std::vector<std::string> corpus;
  std::set<std::string> atomic_set;
  for (const ManifestRecord& r : m.records) {
    corpus.push_back(r.transcript);
    std::string joined;
    for (std::size_t i = 0; i < r.frame.intents.size(); ++i) {
      if (i) joined += "+";
      joined += r.frame.intents[i];
    }
    if (!joined.empty()) atomic_set.insert(joined);
    for (const auto& [type, value] : r.frame.slots) {
      atomic_set.insert(type);
      corpus.push_back(value);
    }
  }
  atomic_set.insert("&");
  const std::vector<std::string> atomic(atomic_set.begin(), atomic_set.end());
  const Vocabulary v = train_vocab(corpus, target_size, min_freq, atomic);
  save_vocab(v, out_path);
}

TrainResult run_train(const RunConfig& cfg, Regime regime, const std::string& manifest_path,
                      const std::string& vocab_path, const std::string& init_ckpt,
                      const std::string& out_ckpt, const std::string& loss_log_path) {
  if (regime == Regime::kFinetuneSlu && init_ckpt.empty())
    throw usage_error("finetune regime requires --init checkpoint");

  const Vocabulary vocab = load_vocab(vocab_path);
  const Manifest manifest = load_manifest(manifest_path);
  const std::vector<TrainingExample> dataset = build_examples(manifest, vocab, regime);

  ModelParams params = [&] {
    if (!init_ckpt.empty()) {
      Checkpoint ck = load_checkpoint(init_ckpt);
      if (ck.params.cfg.vocab_size != vocab.size())
        throw std::runtime_error("train: checkpoint vocab size " +
                                 std::to_string(ck.params.cfg.vocab_size) +
                                 " does not match vocabulary " + std::to_string(vocab.size()));
      return std::move(ck.params);
    }
    Rng init_rng(mix_seed(cfg.getu("seed"), 0x494E4954ull));
    return ModelParams::init(cfg.model_config(vocab.size()), init_rng);
  }();

  const TrainConfig tc = cfg.train_config(regime);
  const MaskingPolicy policy = cfg.masking_policy();
  const RegimeResult rr = run_regime(dataset, params, policy, tc, vocab);

  save_checkpoint(params, out_ckpt, "regime=" + regime_name(regime) + " " + cfg.resolved());
  if (!loss_log_path.empty()) {
    std::ofstream f(loss_log_path, std::ios::binary);
    if (!f) throw std::runtime_error("train: cannot open loss log " + loss_log_path);
    f << rr.loss_log;
  }
  TrainResult out;
  out.epoch_mean_loss = rr.epoch_mean_loss;
  return out;
}

void run_generate(const RunConfig& cfg, DecodeMode mode, DecodeOutput output,
                  const std::vector<std::string>& ckpt_paths, const std::string& manifest_path,
                  const std::string& vocab_path, const std::string& out_hyps,
                  const std::string& nbest_path) {
  const Vocabulary vocab = load_vocab(vocab_path);
  const Manifest manifest = load_manifest(manifest_path);
  if (ckpt_paths.empty() || ckpt_paths[0].empty())
    throw usage_error("generate: missing checkpoint");
  if (output == DecodeOutput::kTwoPass && (ckpt_paths.size() < 2 || ckpt_paths[1].empty()))
    throw usage_error("generate: two-pass output needs --ckpt (pretrained) and --ckpt2 (fine-tuned)");

  const Checkpoint primary = load_checkpoint(ckpt_paths[0]);
  Checkpoint secondary;
  if (output == DecodeOutput::kTwoPass) secondary = load_checkpoint(ckpt_paths[1]);

  DecodeConfig dc = cfg.decode_config(mode, output);
  if (dc.max_len == 0) dc.max_len = primary.params.cfg.max_text - 1;
  dc.validate(primary.params.cfg.max_text);
  if (mode == DecodeMode::kGreedy) dc.beam_size = 1;

  const int N = static_cast<int>(manifest.records.size());
  std::vector<ManifestRecord> hyps(static_cast<std::size_t>(N));
  std::vector<std::string> nbest_blocks(static_cast<std::size_t>(N));

#pragma omp parallel for schedule(dynamic) if (N > 1)
  for (int i = 0; i < N; ++i) {
    const ManifestRecord& r = manifest.records[static_cast<std::size_t>(i)];
    SpeechEmbeddingSequence speech;
    speech.source_id = r.id;
    speech.frames = read_embeddings((fs::path(manifest.dir) / r.embedding_path).string());

    ManifestRecord h;
    h.id = r.id;
    h.embedding_path = "-";

    const BeamResult br = beam_generate(speech, primary.params, dc);
    switch (output) {
      case DecodeOutput::kTranscript:
        h.transcript = detokenize(br.best.token_ids, vocab);
        break;
      case DecodeOutput::kSlu:
        h.frame_text = detokenize(br.best.token_ids, vocab);
        break;
      case DecodeOutput::kAsrSlu: {
        const AsrSluSplit split = split_asr_slu(br.best.token_ids);
        h.transcript = detokenize(split.transcript_ids, vocab);
        h.frame_text = detokenize(split.slu_ids, vocab);
        break;
      }
      case DecodeOutput::kTwoPass: {
        h.transcript = detokenize(br.best.token_ids, vocab);
        const BeamResult slu = beam_generate(speech, secondary.params, dc);
        h.frame_text = detokenize(slu.best.token_ids, vocab);
        break;
      }
    }
    hyps[static_cast<std::size_t>(i)] = std::move(h);
    if (!nbest_path.empty())
      nbest_blocks[static_cast<std::size_t>(i)] = "# " + r.id + "\n" + format_nbest(br.nbest, vocab);
  }

  Manifest out;
  out.records = std::move(hyps);
  save_manifest(out, out_hyps);
  if (!nbest_path.empty()) {
    std::ofstream f(nbest_path, std::ios::binary);
    if (!f) throw std::runtime_error("generate: cannot open " + nbest_path);
    for (const std::string& b : nbest_blocks) f << b;
  }
}

EvalReport run_evaluate(const std::string& refs_path, const std::string& hyps_path,
                        const std::string& out_path, const std::string& config_line) {
  const Manifest refs = load_manifest(refs_path, false);
  const Manifest hyps = load_manifest(hyps_path, false);
  if (refs.records.size() != hyps.records.size())
    throw std::runtime_error("evaluate: " + std::to_string(refs.records.size()) + " refs vs " +
                             std::to_string(hyps.records.size()) + " hyps");

  std::map<std::string, const ManifestRecord*> by_id;
  for (const ManifestRecord& h : hyps.records) by_id[h.id] = &h;

  std::set<std::string> intent_set, type_set;
  for (const ManifestRecord& r : refs.records) {
    for (const std::string& i : r.frame.intents) intent_set.insert(i);
    for (const auto& [t, v] : r.frame.slots) type_set.insert(t);
  }

  std::vector<SemanticFrame> ref_frames, hyp_frames;
  EvalReport report;
  bool any_hyp_transcript = false;
  for (const ManifestRecord& r : refs.records) {
    auto it = by_id.find(r.id);
    if (it == by_id.end())
      throw std::runtime_error("evaluate: no hypothesis for utterance " + r.id);
    const ManifestRecord& h = *it->second;

    if (!r.transcript.empty() && !h.transcript.empty()) {
      any_hyp_transcript = true;
      const auto rw = split_words(normalize_text(r.transcript));
      const auto hw = split_words(normalize_text(h.transcript));
      report.ref_words += static_cast<long long>(rw.size());
      report.word_edits += word_edit_distance(rw, hw);
    }
    ref_frames.push_back(r.frame);
    hyp_frames.push_back(parse_frame(h.frame_text, intent_set, type_set).frame);
  }

  const EvalReport slu = score(ref_frames, hyp_frames);
  const long long ref_words = report.ref_words;
  const long long edits = report.word_edits;
  report = slu;
  if (any_hyp_transcript && ref_words > 0) {
    report.has_wer = true;
    report.ref_words = ref_words;
    report.word_edits = edits;
    report.wer = static_cast<double>(edits) / static_cast<double>(ref_words);
  }

  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("evaluate: cannot open " + out_path);
    f << "#slp-eval v1\n";
    if (!config_line.empty()) f << "#config " << config_line << "\n";
    f << report.to_text();
  }
  return report;
}

}  // namespace slp

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slp/slu_codec.hpp"
#include "slp/tensor.hpp"

namespace slp {

// Continuous frame matrix produced by a speech encoder (here, the synthetic
// character-level pseudo-encoder, or loaded from an embedding file).
struct SpeechEmbeddingSequence {
  Tensor frames;  // S x d_speech
  std::string source_id;
};

struct PseudoEncoderConfig {
  int d_speech = 32;
  int min_frames_per_char = 2;
  int max_frames_per_char = 4;
  double jitter_std = 0.05;
  std::uint64_t seed = 1;
};

// Each character owns a fixed unit-norm vector drawn from (seed, char); the
// utterance repeats it for a random per-character duration and adds jitter.
SpeechEmbeddingSequence pseudo_encode(const std::string& transcript,
                                      const PseudoEncoderConfig& cfg,
                                      std::uint64_t utterance_seed);

struct ManifestRecord {
  std::string id;
  std::string embedding_path;  // relative to the manifest directory; "-" if none
  std::string transcript;
  SemanticFrame frame;
  std::string frame_text;  // raw linearized field (may be model output)
};

struct Manifest {
  std::string dir;
  std::vector<ManifestRecord> records;
};

void save_manifest(const Manifest& m, const std::string& path);
// check_files: verify referenced embedding files exist.
Manifest load_manifest(const std::string& path, bool check_files = true);

void write_embeddings(const std::string& path, const Tensor& frames);
Tensor read_embeddings(const std::string& path);

// One surface pattern plus its meaning. {name} placeholders are filled from
// the grammar lexicons; placeholders listed in slot_placeholders become
// (type, value) slots, and the intent pattern may reference placeholders too.
struct Template {
  std::string text;
  std::string intent;  // may contain {x} and '+' for multi-intent
  std::vector<std::string> slot_placeholders;
};

struct TemplateGrammar {
  std::string name;
  std::vector<Template> templates;
  std::map<std::string, std::vector<std::string>> lexicons;
  bool disjoint_splits = false;  // reject dev/test transcripts seen in train

  std::vector<std::string> intent_labels() const;
  std::vector<std::string> slot_type_labels() const;
};

TemplateGrammar fsc_like_grammar();
TemplateGrammar atis_like_grammar();

struct CorpusStats {
  double test_train_overlap = 0.0;  // fraction of test transcripts also in train
  double dev_train_overlap = 0.0;
};

// Samples instantiations, renders transcripts and frames, writes embedding
// files under <out_dir>/emb and manifests <out_dir>/{train,dev,test}.tsv.
CorpusStats generate_corpus(const TemplateGrammar& grammar, int n_train, int n_dev, int n_test,
                            const PseudoEncoderConfig& cfg, std::uint64_t seed,
                            const std::string& out_dir);

// Render one instantiation of a template with the given rng stream.
struct Instantiation {
  std::string transcript;
  SemanticFrame frame;
};
Instantiation instantiate(const TemplateGrammar& grammar, const Template& tpl, Rng& rng);

}  // namespace slp

#pragma once

#include <map>
#include <string>
#include <vector>

#include "slp/corpus.hpp"
#include "slp/generator.hpp"
#include "slp/trainer.hpp"

namespace slp {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration with a fixed key set; unknown keys are
// rejected. Files hold one key=value per line ('#' comments allowed),
// command-line overrides win over file values.
class RunConfig {
 public:
  RunConfig();

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  int geti(const std::string& key) const;
  double getf(const std::string& key) const;
  std::uint64_t getu(const std::string& key) const;
  const std::string& gets(const std::string& key) const;

  std::string resolved() const;  // canonical "k=v k=v ..." line

  ModelConfig model_config(int vocab_size) const;
  TrainConfig train_config(Regime regime) const;
  MaskingPolicy masking_policy() const;
  PseudoEncoderConfig encoder_config() const;
  DecodeConfig decode_config(DecodeMode mode, DecodeOutput output) const;

 private:
  std::map<std::string, std::string> kv_;
};

struct GenDataResult {
  CorpusStats stats;
};
GenDataResult run_gen_data(const RunConfig& cfg, const std::string& out_dir);

// Builds the vocabulary from manifest transcripts, injecting the control
// tokens the label format needs: "&", every intent-field string, and every
// slot type observed in the manifest frames.
void run_build_vocab(const std::string& manifest_path, int target_size, int min_freq,
                     const std::string& out_path);

struct TrainResult {
  std::vector<double> epoch_mean_loss;
};
TrainResult run_train(const RunConfig& cfg, Regime regime, const std::string& manifest_path,
                      const std::string& vocab_path, const std::string& init_ckpt,
                      const std::string& out_ckpt, const std::string& loss_log_path);

void run_generate(const RunConfig& cfg, DecodeMode mode, DecodeOutput output,
                  const std::vector<std::string>& ckpt_paths, const std::string& manifest_path,
                  const std::string& vocab_path, const std::string& out_hyps,
                  const std::string& nbest_path = "");

EvalReport run_evaluate(const std::string& refs_path, const std::string& hyps_path,
                        const std::string& out_path = "", const std::string& config_line = "");

}  // namespace slp

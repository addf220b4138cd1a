#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slp/pipeline.hpp"
#include "slp/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitVerify = 4;

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string seed;
  bool quiet = false;
  bool json = false;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--config", o->config_file, "key=value config file");
  cmd->add_option("--set", o->overrides, "config override key=value (repeatable)");
  cmd->add_option("--seed", o->seed, "random seed (default: SLP_SEED env or config)");
  cmd->add_flag("--quiet", o->quiet, "suppress informational output");
  cmd->add_flag("--json", o->json, "machine-readable output where supported");
}

slp::RunConfig resolve_config(const CommonOpts& o) {
  slp::RunConfig cfg;
  if (!o.config_file.empty()) cfg.load_file(o.config_file);
  for (const std::string& kv : o.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw slp::usage_error("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.seed.empty()) {
    cfg.set("seed", o.seed);
  } else if (const char* env = std::getenv("SLP_SEED")) {
    cfg.set("seed", env);
  }
  return cfg;
}

void note(const CommonOpts& o, const std::string& msg) {
  if (!o.quiet) std::cout << msg << "\n";
}

slp::Regime parse_regime(const std::string& name) {
  try {
    return slp::regime_from_name(name);
  } catch (const std::exception& e) {
    throw slp::usage_error(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech-language pretraining pipeline"};
  app.require_subcommand(1);

  CommonOpts gen_o, vocab_o, train_o, genr_o, eval_o, verify_o;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic paired corpus");
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory")->required();
  std::string gen_grammar;
  gen->add_option("--grammar", gen_grammar, "fsc-like | atis-like");
  int gen_train = -1, gen_dev = -1, gen_test = -1;
  gen->add_option("--n-train", gen_train);
  gen->add_option("--n-dev", gen_dev);
  gen->add_option("--n-test", gen_test);
  add_common(gen, &gen_o);

  // build-vocab
  auto* bv = app.add_subcommand("build-vocab", "train the subword vocabulary");
  std::string bv_manifest, bv_out;
  int bv_size = 0, bv_minfreq = 0;
  bv->add_option("--manifest", bv_manifest, "training manifest")->required();
  bv->add_option("--out", bv_out, "vocabulary file")->required();
  bv->add_option("--size", bv_size, "target vocabulary size");
  bv->add_option("--min-freq", bv_minfreq, "minimum merge frequency");
  add_common(bv, &vocab_o);

  // train
  auto* tr = app.add_subcommand("train", "train a model under a regime");
  std::string tr_regime, tr_manifest, tr_vocab, tr_init, tr_out, tr_losslog;
  tr->add_option("--regime", tr_regime, "pretrain | finetune | onestep-slu | onestep-asr-slu")
      ->required();
  tr->add_option("--manifest", tr_manifest)->required();
  tr->add_option("--vocab", tr_vocab)->required();
  tr->add_option("--init", tr_init, "initial checkpoint (required for finetune)");
  tr->add_option("--out", tr_out, "output checkpoint")->required();
  tr->add_option("--loss-log", tr_losslog, "loss log file");
  add_common(tr, &train_o);

  // generate
  auto* ge = app.add_subcommand("generate", "decode a manifest into hypotheses");
  std::string ge_mode = "beam", ge_output = "transcript";
  std::string ge_ckpt, ge_ckpt2, ge_manifest, ge_vocab, ge_out, ge_nbest;
  ge->add_option("--mode", ge_mode, "greedy | beam");
  ge->add_option("--output", ge_output, "transcript | slu | asr-slu | two-pass");
  ge->add_option("--ckpt", ge_ckpt, "checkpoint (pretrained one for two-pass)")->required();
  ge->add_option("--ckpt2", ge_ckpt2, "fine-tuned checkpoint for two-pass");
  ge->add_option("--manifest", ge_manifest)->required();
  ge->add_option("--vocab", ge_vocab)->required();
  ge->add_option("--out", ge_out, "hypothesis manifest")->required();
  ge->add_option("--nbest", ge_nbest, "n-best list file");
  add_common(ge, &genr_o);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score hypotheses against references");
  std::string ev_refs, ev_hyps, ev_out;
  ev->add_option("--refs", ev_refs)->required();
  ev->add_option("--hyps", ev_hyps)->required();
  ev->add_option("--out", ev_out, "report file");
  add_common(ev, &eval_o);

  // verify
  auto* vf = app.add_subcommand("verify", "run the property suites");
  std::string vf_suite = "all";
  vf->add_option("--suite", vf_suite,
                 "all | gradcheck | causality | teacher-forcing | beam | masking | codec");
  add_common(vf, &verify_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      slp::RunConfig cfg = resolve_config(gen_o);
      if (!gen_grammar.empty()) cfg.set("corpus.grammar", gen_grammar);
      if (gen_train >= 0) cfg.set("corpus.n_train", std::to_string(gen_train));
      if (gen_dev >= 0) cfg.set("corpus.n_dev", std::to_string(gen_dev));
      if (gen_test >= 0) cfg.set("corpus.n_test", std::to_string(gen_test));
      note(gen_o, "config: " + cfg.resolved());
      const slp::GenDataResult r = slp::run_gen_data(cfg, gen_out);
      note(gen_o, "dev/train transcript overlap: " + std::to_string(r.stats.dev_train_overlap));
      note(gen_o, "test/train transcript overlap: " + std::to_string(r.stats.test_train_overlap));
    } else if (bv->parsed()) {
      slp::RunConfig cfg = resolve_config(vocab_o);
      if (bv_size > 0) cfg.set("vocab.size", std::to_string(bv_size));
      if (bv_minfreq > 0) cfg.set("vocab.min_freq", std::to_string(bv_minfreq));
      note(vocab_o, "config: " + cfg.resolved());
      slp::run_build_vocab(bv_manifest, cfg.geti("vocab.size"), cfg.geti("vocab.min_freq"),
                           bv_out);
      note(vocab_o, "wrote " + bv_out);
    } else if (tr->parsed()) {
      slp::RunConfig cfg = resolve_config(train_o);
      note(train_o, "config: " + cfg.resolved());
      const slp::TrainResult r = slp::run_train(cfg, parse_regime(tr_regime),
                                                tr_manifest, tr_vocab, tr_init, tr_out,
                                                tr_losslog);
      if (!train_o.quiet)
        for (std::size_t e = 0; e < r.epoch_mean_loss.size(); ++e)
          std::printf("epoch %zu mean_loss %.6f\n", e + 1, r.epoch_mean_loss[e]);
      note(train_o, "wrote " + tr_out);
    } else if (ge->parsed()) {
      slp::RunConfig cfg = resolve_config(genr_o);
      note(genr_o, "config: " + cfg.resolved());
      slp::DecodeMode mode;
      if (ge_mode == "greedy") mode = slp::DecodeMode::kGreedy;
      else if (ge_mode == "beam") mode = slp::DecodeMode::kBeam;
      else throw slp::usage_error("unknown --mode '" + ge_mode + "'");
      slp::DecodeOutput output;
      if (ge_output == "transcript") output = slp::DecodeOutput::kTranscript;
      else if (ge_output == "slu") output = slp::DecodeOutput::kSlu;
      else if (ge_output == "asr-slu") output = slp::DecodeOutput::kAsrSlu;
      else if (ge_output == "two-pass") output = slp::DecodeOutput::kTwoPass;
      else throw slp::usage_error("unknown --output '" + ge_output + "'");
      slp::run_generate(cfg, mode, output, {ge_ckpt, ge_ckpt2}, ge_manifest, ge_vocab, ge_out,
                        ge_nbest);
      note(genr_o, "wrote " + ge_out);
    } else if (ev->parsed()) {
      slp::RunConfig cfg = resolve_config(eval_o);
      const slp::EvalReport r = slp::run_evaluate(ev_refs, ev_hyps, ev_out, cfg.resolved());
      std::cout << (eval_o.json ? r.to_json() + "\n" : r.to_text());
    } else if (vf->parsed()) {
      slp::RunConfig cfg = resolve_config(verify_o);
      const std::uint64_t seed = cfg.getu("seed");
      std::vector<slp::VerifyResult> results;
      if (vf_suite == "all") {
        results = slp::verify_all(seed);
      } else if (vf_suite == "gradcheck") {
        results.push_back(slp::verify_gradcheck(seed));
        results.push_back(slp::verify_gradcheck_small(seed));
      } else if (vf_suite == "causality") {
        results.push_back(slp::verify_mask_causality(200, seed));
      } else if (vf_suite == "teacher-forcing") {
        results.push_back(slp::verify_teacher_forcing(50, seed));
      } else if (vf_suite == "beam") {
        results.push_back(slp::verify_beam_oracle(100, seed));
        results.push_back(slp::verify_beam_greedy(100, seed));
      } else if (vf_suite == "masking") {
        results.push_back(slp::verify_masking_stats(100000, seed));
      } else if (vf_suite == "codec") {
        results.push_back(slp::verify_codec_roundtrip(10000, seed));
        results.push_back(slp::verify_wer_oracle(1000, seed));
        results.push_back(slp::verify_score_oracle(25, seed));
      } else {
        throw slp::usage_error("unknown --suite '" + vf_suite + "'");
      }
      bool all_pass = true;
      for (const slp::VerifyResult& r : results) {
        all_pass = all_pass && r.pass;
        if (verify_o.json)
          std::printf("{\"suite\":\"%s\",\"pass\":%s,\"detail\":\"%s\"}\n", r.name.c_str(),
                      r.pass ? "true" : "false", r.detail.c_str());
        else
          std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                      r.detail.c_str());
      }
      return all_pass ? kExitOk : kExitVerify;
    }
  } catch (const slp::usage_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}

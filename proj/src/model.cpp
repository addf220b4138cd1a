#include "slp/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "slp/ops.hpp"

namespace slp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ModelConfig::validate() const {
  if (n_layers < 0 || n_heads < 1 || d_model < 1 || d_ff < 1 || vocab_size < 1 ||
      d_speech < 1 || max_frames < 1 || max_text < 1)
    throw std::runtime_error("model config: non-positive dimension");
  if (d_model % n_heads != 0)
    throw std::runtime_error("model config: d_model " + std::to_string(d_model) +
                             " not divisible by n_heads " + std::to_string(n_heads));
}

std::string ModelConfig::to_kv() const {
  std::ostringstream os;
  os << "n_layers=" << n_layers << " n_heads=" << n_heads << " d_model=" << d_model
     << " d_ff=" << d_ff << " vocab_size=" << vocab_size << " d_speech=" << d_speech
     << " max_frames=" << max_frames << " max_text=" << max_text;
  return os.str();
}

ModelConfig ModelConfig::from_kv(const std::string& kv) {
  ModelConfig c;
  std::istringstream is(kv);
  std::string tok;
  while (is >> tok) {
    const std::size_t eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    int* field = nullptr;
    if (key == "n_layers") field = &c.n_layers;
    else if (key == "n_heads") field = &c.n_heads;
    else if (key == "d_model") field = &c.d_model;
    else if (key == "d_ff") field = &c.d_ff;
    else if (key == "vocab_size") field = &c.vocab_size;
    else if (key == "d_speech") field = &c.d_speech;
    else if (key == "max_frames") field = &c.max_frames;
    else if (key == "max_text") field = &c.max_text;
    if (field) *field = std::stoi(tok.substr(eq + 1));
  }
  return c;
}

AttentionMask build_mask_parts(int length, int speech_part_end, int text_part_end) {
  if (speech_part_end < 0 || text_part_end < speech_part_end || text_part_end > length)
    throw std::runtime_error("build_mask: bad part boundaries");
  AttentionMask mask;
  mask.m = Tensor::full({length, length}, -kInf);
  double* m = mask.m.ptr();
  for (int i = 0; i < speech_part_end; ++i)
    for (int j = 0; j < speech_part_end; ++j) m[static_cast<std::size_t>(i) * length + j] = 0.0;
  for (int i = speech_part_end; i < text_part_end; ++i) {
    for (int j = 0; j < speech_part_end; ++j) m[static_cast<std::size_t>(i) * length + j] = 0.0;
    for (int j = speech_part_end; j <= i; ++j) m[static_cast<std::size_t>(i) * length + j] = 0.0;
  }
  return mask;
}

AttentionMask build_mask(std::pair<int, int> speech_span, std::pair<int, int> text_span,
                         const std::vector<char>& is_pad) {
  const int L = static_cast<int>(is_pad.size());
  if (speech_span.first > speech_span.second || text_span.first > text_span.second)
    throw std::runtime_error("build_mask: inverted span");
  if (text_span.first < speech_span.second && text_span.second > speech_span.first)
    throw std::runtime_error("build_mask: overlapping speech/text spans");
  if (speech_span.first != 1 || text_span.first != speech_span.second + 1)
    throw std::runtime_error("build_mask: spans do not follow the joint layout");
  const int speech_part_end = text_span.first;      // [BOS] frames [SEP]
  const int text_part_end = text_span.second + 1;   // text [EOS]
  if (text_part_end > L) throw std::runtime_error("build_mask: text span exceeds length");
  for (int i = 0; i < text_part_end; ++i)
    if (is_pad[static_cast<std::size_t>(i)])
      throw std::runtime_error("build_mask: pad flag inside content at position " +
                               std::to_string(i));
  return build_mask_parts(L, speech_part_end, text_part_end);
}

AttentionMask mask_for(const JointInput& input) {
  return build_mask(input.speech_span(), input.text_span(), input.is_pad);
}

Tensor attention_core(const Tensor& x, const LayerParams& lp, const AttentionMask& mask,
                      const ModelConfig& cfg) {
  const int L = x.rows();
  if (mask.m.rows() != L)
    throw std::runtime_error("attention: mask size " + std::to_string(mask.m.rows()) +
                             " does not match sequence length " + std::to_string(L));
  const int dk = cfg.d_k();

  // Rows that are fully blocked (padding) get pinned to self-attention so the
  // softmax stays defined; their outputs are never read.
  Tensor m_eff = mask.m;
  {
    const double* src = mask.m.ptr();
    bool any_blocked = false;
    for (int i = 0; i < L && !any_blocked; ++i) {
      bool all_inf = true;
      for (int j = 0; j < L; ++j)
        if (src[static_cast<std::size_t>(i) * L + j] != -kInf) {
          all_inf = false;
          break;
        }
      any_blocked = all_inf;
    }
    if (any_blocked) {
      m_eff = Tensor::zeros({L, L});
      std::memcpy(m_eff.ptr(), src, sizeof(double) * mask.m.numel());
      double* dst = m_eff.ptr();
      for (int i = 0; i < L; ++i) {
        bool all_inf = true;
        for (int j = 0; j < L; ++j)
          if (dst[static_cast<std::size_t>(i) * L + j] != -kInf) {
            all_inf = false;
            break;
          }
        if (all_inf) dst[static_cast<std::size_t>(i) * L + i] = 0.0;
      }
    }
  }

  const Tensor q = add_bias_rows(matmul(x, lp.wq.value), lp.bq.value);
  const Tensor k = add_bias_rows(matmul(x, lp.wk.value), lp.bk.value);
  const Tensor v = add_bias_rows(matmul(x, lp.wv.value), lp.bv.value);

  std::vector<Tensor> heads;
  heads.reserve(static_cast<std::size_t>(cfg.n_heads));
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  for (int h = 0; h < cfg.n_heads; ++h) {
    const Tensor qh = slice_cols(q, h * dk, (h + 1) * dk);
    const Tensor kh = slice_cols(k, h * dk, (h + 1) * dk);
    const Tensor vh = slice_cols(v, h * dk, (h + 1) * dk);
    const Tensor scores = add(scale(matmul_nt(qh, kh), inv_sqrt_dk), m_eff);
    const Tensor attn = softmax_lastdim(scores);
    heads.push_back(matmul(attn, vh));
  }
  const Tensor merged = cfg.n_heads == 1 ? heads[0] : concat_cols(heads);
  return add_bias_rows(matmul(merged, lp.wo.value), lp.bo.value);
}

Tensor self_attention(const Tensor& x, const LayerParams& lp, const AttentionMask& mask,
                      const ModelConfig& cfg) {
  const Tensor attn = attention_core(x, lp, mask, cfg);
  const Tensor y = layer_norm(add(x, attn), lp.ln1_g.value, lp.ln1_b.value, kLayerNormEps);
  const Tensor h = gelu(add_bias_rows(matmul(y, lp.ff_w1.value), lp.ff_b1.value));
  const Tensor f = add_bias_rows(matmul(h, lp.ff_w2.value), lp.ff_b2.value);
  return layer_norm(add(y, f), lp.ln2_g.value, lp.ln2_b.value, kLayerNormEps);
}

Tensor forward(const JointInput& input, const ModelParams& params, const AttentionMask& mask) {
  params.cfg.validate();
  if (input.embeddings.cols() != params.cfg.d_model)
    throw std::runtime_error("forward: embedding width " +
                             std::to_string(input.embeddings.cols()) + " vs d_model " +
                             std::to_string(params.cfg.d_model));
  const int L = input.length();
  if (mask.m.rows() != L)
    throw std::runtime_error("forward: mask/input length mismatch");

  const Tensor emb_n = layer_norm(input.embeddings, params.emb_ln_g.value,
                                  params.emb_ln_b.value, kLayerNormEps);

  // Padding is a contiguous tail whose columns are fully blocked, so the
  // block stack over the content prefix is bit-identical to running the full
  // length; pad rows keep their normalized embeddings (outputs at pad
  // positions are ignored by contract).
  int content = L;
  while (content > 0 && input.is_pad[static_cast<std::size_t>(content - 1)]) --content;
  for (int i = 0; i < content; ++i)
    if (input.is_pad[static_cast<std::size_t>(i)])
      throw std::runtime_error("forward: non-contiguous padding");

  if (content == L) {
    Tensor h = emb_n;
    for (const LayerParams& lp : params.layers) h = self_attention(h, lp, mask, params.cfg);
    return h;
  }

  AttentionMask sub;
  sub.m = Tensor::zeros({content, content});
  for (int i = 0; i < content; ++i)
    std::memcpy(sub.m.ptr() + static_cast<std::size_t>(i) * content,
                mask.m.ptr() + static_cast<std::size_t>(i) * L, sizeof(double) * content);

  Tensor h = slice_rows(emb_n, 0, content);
  for (const LayerParams& lp : params.layers) h = self_attention(h, lp, sub, params.cfg);
  return concat_rows({h, slice_rows(emb_n, content, L)});
}

Tensor mlm_logits(const Tensor& hidden, const ModelParams& params) {
  return add_bias_rows(matmul_nt(hidden, params.tok_emb.value), params.mlm_bias.value);
}

namespace {
Parameter make_param(const std::string& name, Tensor t) { return Parameter(name, std::move(t)); }
}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, Rng& rng, double init_std) {
  cfg.validate();
  ModelParams p;
  p.cfg = cfg;
  p.tok_emb = make_param("tok_emb", Tensor::randn({cfg.vocab_size, cfg.d_model}, rng, init_std));
  p.pos_emb =
      make_param("pos_emb", Tensor::randn({cfg.max_positions(), cfg.d_model}, rng, init_std));
  p.seg_emb = make_param("seg_emb", Tensor::randn({2, cfg.d_model}, rng, init_std));
  p.proj_w = make_param("proj_w", Tensor::randn({cfg.d_speech, cfg.d_model}, rng, init_std));
  p.proj_b = make_param("proj_b", Tensor::zeros({cfg.d_model}));
  p.emb_ln_g = make_param("emb_ln_g", Tensor::full({cfg.d_model}, 1.0));
  p.emb_ln_b = make_param("emb_ln_b", Tensor::zeros({cfg.d_model}));
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    LayerParams lp;
    lp.wq = make_param(pre + "wq", Tensor::randn({cfg.d_model, cfg.d_model}, rng, init_std));
    lp.bq = make_param(pre + "bq", Tensor::zeros({cfg.d_model}));
    lp.wk = make_param(pre + "wk", Tensor::randn({cfg.d_model, cfg.d_model}, rng, init_std));
    lp.bk = make_param(pre + "bk", Tensor::zeros({cfg.d_model}));
    lp.wv = make_param(pre + "wv", Tensor::randn({cfg.d_model, cfg.d_model}, rng, init_std));
    lp.bv = make_param(pre + "bv", Tensor::zeros({cfg.d_model}));
    lp.wo = make_param(pre + "wo", Tensor::randn({cfg.d_model, cfg.d_model}, rng, init_std));
    lp.bo = make_param(pre + "bo", Tensor::zeros({cfg.d_model}));
    lp.ln1_g = make_param(pre + "ln1_g", Tensor::full({cfg.d_model}, 1.0));
    lp.ln1_b = make_param(pre + "ln1_b", Tensor::zeros({cfg.d_model}));
    lp.ff_w1 = make_param(pre + "ff_w1", Tensor::randn({cfg.d_model, cfg.d_ff}, rng, init_std));
    lp.ff_b1 = make_param(pre + "ff_b1", Tensor::zeros({cfg.d_ff}));
    lp.ff_w2 = make_param(pre + "ff_w2", Tensor::randn({cfg.d_ff, cfg.d_model}, rng, init_std));
    lp.ff_b2 = make_param(pre + "ff_b2", Tensor::zeros({cfg.d_model}));
    lp.ln2_g = make_param(pre + "ln2_g", Tensor::full({cfg.d_model}, 1.0));
    lp.ln2_b = make_param(pre + "ln2_b", Tensor::zeros({cfg.d_model}));
    p.layers.push_back(std::move(lp));
  }
  p.mlm_bias = make_param("mlm_bias", Tensor::zeros({cfg.vocab_size}));
  return p;
}

std::vector<Parameter*> ModelParams::all() {
  std::vector<Parameter*> out = {&tok_emb, &pos_emb, &seg_emb,  &proj_w,
                                 &proj_b,  &emb_ln_g, &emb_ln_b};
  for (LayerParams& lp : layers) {
    out.push_back(&lp.wq);
    out.push_back(&lp.bq);
    out.push_back(&lp.wk);
    out.push_back(&lp.bk);
    out.push_back(&lp.wv);
    out.push_back(&lp.bv);
    out.push_back(&lp.wo);
    out.push_back(&lp.bo);
    out.push_back(&lp.ln1_g);
    out.push_back(&lp.ln1_b);
    out.push_back(&lp.ff_w1);
    out.push_back(&lp.ff_b1);
    out.push_back(&lp.ff_w2);
    out.push_back(&lp.ff_b2);
    out.push_back(&lp.ln2_g);
    out.push_back(&lp.ln2_b);
  }
  out.push_back(&mlm_bias);
  return out;
}

std::vector<const Parameter*> ModelParams::all() const {
  auto* self = const_cast<ModelParams*>(this);
  std::vector<Parameter*> mut = self->all();
  return {mut.begin(), mut.end()};
}

std::size_t ModelParams::num_params() const {
  std::size_t n = 0;
  for (const Parameter* p : all()) n += p->value.numel();
  return n;
}

ModelParams ModelParams::grad_view() const {
  ModelParams v = *this;  // shares all buffers
  for (Parameter* p : v.all()) *p = p->make_grad_view();
  return v;
}

namespace {

void put_u64_le(std::ofstream& f, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  f.write(buf, 8);
}

std::uint64_t get_u64_le(std::ifstream& f) {
  unsigned char buf[8];
  f.read(reinterpret_cast<char*>(buf), 8);
  if (!f) throw std::runtime_error("checkpoint: truncated record");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path,
                     const std::string& extra_meta) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f << "#slp-ckpt v1\n";
  f << "#config " << params.cfg.to_kv();
  if (!extra_meta.empty()) f << " " << extra_meta;
  f << "\n";
  for (const Parameter* p : params.all()) {
    put_u64_le(f, p->name.size());
    f.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_u64_le(f, p->value.shape.size());
    for (int d : p->value.shape) put_u64_le(f, static_cast<std::uint64_t>(d));
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      const float fv = static_cast<float>((*p->value.data)[i]);
      std::uint32_t bits;
      std::memcpy(&bits, &fv, 4);
      char buf[4];
      for (int b = 0; b < 4; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      f.write(buf, 4);
    }
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "#slp-ckpt v1")
    throw std::runtime_error("load_checkpoint: bad header in " + path);
  if (!std::getline(f, line) || line.rfind("#config ", 0) != 0)
    throw std::runtime_error("load_checkpoint: missing #config line in " + path);

  Checkpoint ck;
  ck.meta = line.substr(8);
  const ModelConfig cfg = ModelConfig::from_kv(ck.meta);
  Rng dummy(0);
  ck.params = ModelParams::init(cfg, dummy, 0.0);

  for (Parameter* p : ck.params.all()) {
    const std::uint64_t name_len = get_u64_le(f);
    std::string name(name_len, '\0');
    f.read(name.data(), static_cast<std::streamsize>(name_len));
    if (!f || name != p->name)
      throw std::runtime_error("load_checkpoint: expected parameter '" + p->name + "', found '" +
                               name + "'");
    const std::uint64_t rank = get_u64_le(f);
    if (rank != p->value.shape.size())
      throw std::runtime_error("load_checkpoint: rank mismatch for " + name);
    for (std::size_t d = 0; d < rank; ++d) {
      const std::uint64_t dim = get_u64_le(f);
      if (dim != static_cast<std::uint64_t>(p->value.shape[d]))
        throw std::runtime_error("load_checkpoint: shape mismatch for " + name);
    }
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      unsigned char buf[4];
      f.read(reinterpret_cast<char*>(buf), 4);
      if (!f) throw std::runtime_error("load_checkpoint: truncated values for " + name);
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[b]) << (8 * b);
      float fv;
      std::memcpy(&fv, &bits, 4);
      (*p->value.data)[i] = static_cast<double>(fv);
    }
  }
  return ck;
}

}  // namespace slp

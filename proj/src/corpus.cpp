#include "slp/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "slp/tokenizer.hpp"

namespace fs = std::filesystem;

namespace slp {

namespace {

void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const std::string& s, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[off])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 3])) << 24;
}

std::vector<std::string> split_on_plus(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = s.find('+', pos);
    if (hit == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, hit - pos));
    pos = hit + 1;
  }
}

std::vector<double> unit_char_vector(char c, int d, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x43484152ull, static_cast<std::uint64_t>(static_cast<unsigned char>(c))));
  std::vector<double> v(static_cast<std::size_t>(d));
  double norm2 = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace

SpeechEmbeddingSequence pseudo_encode(const std::string& transcript,
                                      const PseudoEncoderConfig& cfg,
                                      std::uint64_t utterance_seed) {
  const std::string text = normalize_text(transcript);
  if (text.empty()) throw std::runtime_error("pseudo_encode: empty transcript");
  if (cfg.d_speech < 8) throw std::runtime_error("pseudo_encode: d_speech must be >= 8");
  if (cfg.jitter_std < 0.0) throw std::runtime_error("pseudo_encode: negative jitter_std");
  if (cfg.min_frames_per_char < 1 || cfg.max_frames_per_char < cfg.min_frames_per_char)
    throw std::runtime_error("pseudo_encode: bad frames_per_char range");

  Rng utt_rng(mix_seed(cfg.seed, 0x55545452ull, utterance_seed));
  std::vector<int> durations(text.size());
  int total = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    durations[i] = utt_rng.range(cfg.min_frames_per_char, cfg.max_frames_per_char);
    total += durations[i];
  }

  Tensor frames = Tensor::zeros({total, cfg.d_speech});
  double* out = frames.ptr();
  int row = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const std::vector<double> v = unit_char_vector(text[i], cfg.d_speech, cfg.seed);
    for (int r = 0; r < durations[i]; ++r, ++row)
      std::memcpy(out + static_cast<std::size_t>(row) * cfg.d_speech, v.data(),
                  sizeof(double) * static_cast<std::size_t>(cfg.d_speech));
  }
  for (std::size_t i = 0; i < frames.numel(); ++i)
    out[i] += utt_rng.normal(0.0, cfg.jitter_std);

  SpeechEmbeddingSequence seq;
  seq.frames = std::move(frames);
  return seq;
}

void write_embeddings(const std::string& path, const Tensor& frames) {
  if (frames.shape.size() != 2 || frames.rows() < 1 || frames.cols() < 1)
    throw std::runtime_error("write_embeddings: frames must be a non-empty 2D matrix");
  std::string out = "SLPE";
  out.push_back(static_cast<char>(1));
  put_u32_le(out, static_cast<std::uint32_t>(frames.rows()));
  put_u32_le(out, static_cast<std::uint32_t>(frames.cols()));
  const double* v = frames.ptr();
  for (std::size_t i = 0; i < frames.numel(); ++i)
    put_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v[i])));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_embeddings: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Tensor read_embeddings(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_embeddings: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 13)
    throw std::runtime_error("read_embeddings: " + path + ": truncated header at offset " +
                             std::to_string(bytes.size()));
  if (bytes.compare(0, 4, "SLPE") != 0)
    throw std::runtime_error("read_embeddings: " + path + ": bad magic at offset 0");
  if (bytes[4] != 1)
    throw std::runtime_error("read_embeddings: " + path + ": unsupported version at offset 4");
  const std::uint32_t s = get_u32_le(bytes, 5);
  const std::uint32_t d = get_u32_le(bytes, 9);
  if (s == 0 || d == 0)
    throw std::runtime_error("read_embeddings: " + path + ": zero dimension at offset 5");
  const std::size_t need = 13 + static_cast<std::size_t>(s) * d * 4;
  if (bytes.size() != need)
    throw std::runtime_error("read_embeddings: " + path + ": expected " + std::to_string(need) +
                             " bytes, got " + std::to_string(bytes.size()) +
                             " (payload at offset 13)");
  Tensor t = Tensor::zeros({static_cast<int>(s), static_cast<int>(d)});
  double* out = t.ptr();
  for (std::size_t i = 0; i < t.numel(); ++i)
    out[i] = static_cast<double>(std::bit_cast<float>(get_u32_le(bytes, 13 + i * 4)));
  return t;
}

void save_manifest(const Manifest& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_manifest: cannot open " + path);
  for (const ManifestRecord& r : m.records)
    f << r.id << "\t" << r.embedding_path << "\t" << r.transcript << "\t"
      << (r.frame_text.empty() ? linearize(r.frame) : r.frame_text) << "\n";
}

Manifest load_manifest(const std::string& path, bool check_files) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_manifest: cannot open " + path);
  Manifest m;
  m.dir = fs::path(path).parent_path().string();
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (fields.size() < 3) {
      const std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) break;
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (fields.size() < 3)
      throw std::runtime_error("load_manifest: " + path + ":" + std::to_string(lineno) +
                               ": expected 4 tab-separated fields");
    fields.push_back(line.substr(pos));

    ManifestRecord r;
    r.id = fields[0];
    r.embedding_path = fields[1];
    r.transcript = fields[2];
    r.frame_text = fields[3];
    r.frame = parse_frame(fields[3], {}, {}).frame;
    if (!ids.insert(r.id).second)
      throw std::runtime_error("load_manifest: duplicate id '" + r.id + "' in " + path);
    if (check_files && r.embedding_path != "-") {
      const fs::path p = fs::path(m.dir) / r.embedding_path;
      if (!fs::exists(p))
        throw std::runtime_error("load_manifest: missing embedding file " + p.string());
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

std::vector<std::string> TemplateGrammar::intent_labels() const {
  std::set<std::string> out;
  for (const Template& t : templates) {
    // expand placeholders in the intent pattern
    std::vector<std::string> partial = {t.intent};
    for (const auto& [name, values] : lexicons) {
      const std::string ph = "{" + name + "}";
      std::vector<std::string> next;
      for (const std::string& s : partial) {
        if (s.find(ph) == std::string::npos) {
          next.push_back(s);
          continue;
        }
        for (const std::string& v : values) {
          std::string r = s;
          std::size_t at;
          while ((at = r.find(ph)) != std::string::npos) r.replace(at, ph.size(), v);
          next.push_back(r);
        }
      }
      partial = std::move(next);
    }
    for (const std::string& s : partial)
      for (const std::string& i : split_on_plus(s)) out.insert(i);
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> TemplateGrammar::slot_type_labels() const {
  std::set<std::string> out;
  for (const Template& t : templates)
    for (const std::string& p : t.slot_placeholders) out.insert(p);
  return {out.begin(), out.end()};
}

Instantiation instantiate(const TemplateGrammar& grammar, const Template& tpl, Rng& rng) {
  Instantiation inst;
  std::string text = tpl.text;
  std::string intent = tpl.intent;
  std::map<std::string, std::string> chosen;

  // Fill placeholders left to right as they appear in the surface text.
  std::size_t at;
  while ((at = text.find('{')) != std::string::npos) {
    const std::size_t end = text.find('}', at);
    if (end == std::string::npos)
      throw std::runtime_error("instantiate: unbalanced '{' in template: " + tpl.text);
    const std::string name = text.substr(at + 1, end - at - 1);
    auto it = grammar.lexicons.find(name);
    if (it == grammar.lexicons.end() || it->second.empty())
      throw std::runtime_error("instantiate: no lexicon for placeholder '" + name + "'");
    std::string value = it->second[rng.below(it->second.size())];
    // Avoid degenerate repeats when two placeholders share a lexicon
    // (e.g. departure and arrival city).
    for (int tries = 0; tries < 16; ++tries) {
      bool clash = false;
      for (const auto& [k, v] : chosen)
        if (v == value && k != name) clash = true;
      if (!clash) break;
      value = it->second[rng.below(it->second.size())];
    }
    chosen[name] = value;
    text.replace(at, end - at + 1, value);
  }
  while ((at = intent.find('{')) != std::string::npos) {
    const std::size_t end = intent.find('}', at);
    const std::string name = intent.substr(at + 1, end - at - 1);
    auto it = chosen.find(name);
    if (it == chosen.end())
      throw std::runtime_error("instantiate: intent placeholder '" + name +
                               "' not bound by surface text");
    intent.replace(at, end - at + 1, it->second);
  }

  inst.transcript = normalize_text(text);
  inst.frame.intents = split_on_plus(intent);
  for (const std::string& p : tpl.slot_placeholders) {
    auto it = chosen.find(p);
    if (it == chosen.end())
      throw std::runtime_error("instantiate: slot placeholder '" + p + "' unused in template");
    inst.frame.slots.emplace_back(p, it->second);
  }
  return inst;
}

TemplateGrammar fsc_like_grammar() {
  TemplateGrammar g;
  g.name = "fsc-like";
  g.disjoint_splits = false;
  g.lexicons["device"] = {"lights", "music", "lamp", "fan"};
  g.lexicons["room"] = {"kitchen", "bedroom", "washroom"};

  // Intent = action_device or action_device_room, mirroring command-and-
  // control style data: 2 actions x 4 devices x (3 rooms + bare) = 32 labels.
  const std::vector<std::pair<std::string, std::string>> actions = {
      {"turn on", "activate"}, {"switch on", "activate"},
      {"turn off", "deactivate"}, {"switch off", "deactivate"}};
  for (const auto& [surface, act] : actions) {
    g.templates.push_back({surface + " the {device}", act + "_{device}", {}});
    g.templates.push_back({"please " + surface + " the {device}", act + "_{device}", {}});
    g.templates.push_back(
        {surface + " the {device} in the {room}", act + "_{device}_{room}", {}});
  }
  return g;
}

TemplateGrammar atis_like_grammar() {
  TemplateGrammar g;
  g.name = "atis-like";
  g.disjoint_splits = true;
  g.lexicons["from_city"] = {"boston", "denver", "dallas", "atlanta", "oakland", "newark"};
  g.lexicons["to_city"] = {"boston", "denver", "dallas", "atlanta", "oakland", "newark"};
  g.lexicons["depart_date"] = {"monday", "tuesday", "friday", "saturday", "sunday"};
  g.lexicons["depart_time"] = {"morning", "noon", "afternoon", "evening"};
  g.lexicons["airline"] = {"delta", "united", "american"};

  g.templates.push_back({"flights from {from_city} to {to_city}",
                         "flight_info",
                         {"from_city", "to_city"}});
  g.templates.push_back({"flights from {from_city} to {to_city} on {depart_date}",
                         "flight_info",
                         {"from_city", "to_city", "depart_date"}});
  g.templates.push_back({"show {depart_time} flights to {to_city}",
                         "flight_info",
                         {"depart_time", "to_city"}});
  g.templates.push_back({"fares from {from_city} to {to_city}",
                         "airfare",
                         {"from_city", "to_city"}});
  g.templates.push_back({"fares and flights from {from_city} to {to_city}",
                         "airfare+flight_info",
                         {"from_city", "to_city"}});
  g.templates.push_back({"list {airline} flights to {to_city} on {depart_date}",
                         "flight_info",
                         {"airline", "to_city", "depart_date"}});
  g.templates.push_back({"when does the {airline} flight to {to_city} leave",
                         "flight_time",
                         {"airline", "to_city"}});
  return g;
}

CorpusStats generate_corpus(const TemplateGrammar& grammar, int n_train, int n_dev, int n_test,
                            const PseudoEncoderConfig& cfg, std::uint64_t seed,
                            const std::string& out_dir) {
  if (grammar.templates.empty()) throw std::runtime_error("generate_corpus: empty grammar");
  if (n_train < 0 || n_dev < 0 || n_test < 0)
    throw std::runtime_error("generate_corpus: negative split size");

  fs::create_directories(out_dir);
  if (n_train + n_dev + n_test > 0) fs::create_directories(fs::path(out_dir) / "emb");

  std::set<std::string> train_transcripts;
  CorpusStats stats;

  const std::vector<std::string> split_names = {"train", "dev", "test"};
  const std::vector<int> sizes = {n_train, n_dev, n_test};
  for (int s = 0; s < 3; ++s) {
    Manifest m;
    m.dir = out_dir;
    Rng rng(mix_seed(seed, 0x53504C54ull, static_cast<std::uint64_t>(s)));
    long long overlap = 0;
    for (int i = 0; i < sizes[s]; ++i) {
      Instantiation inst;
      bool ok = false;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const Template& tpl = grammar.templates[rng.below(grammar.templates.size())];
        inst = instantiate(grammar, tpl, rng);
        if (s == 0 || !grammar.disjoint_splits ||
            !train_transcripts.count(inst.transcript)) {
          ok = true;
          break;
        }
      }
      if (!ok)
        throw std::runtime_error(
            "generate_corpus: grammar too small to sample split '" + split_names[s] +
            "' disjoint from train");
      if (s == 0) train_transcripts.insert(inst.transcript);
      if (s > 0 && train_transcripts.count(inst.transcript)) overlap += 1;

      ManifestRecord r;
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "%s-%05d", split_names[s].c_str(), i);
      r.id = idbuf;
      r.embedding_path = "emb/" + r.id + ".slpe";
      r.transcript = inst.transcript;
      r.frame = inst.frame;

      const std::uint64_t utt_seed = mix_seed(seed, static_cast<std::uint64_t>(s) + 100, i);
      const SpeechEmbeddingSequence seq = pseudo_encode(inst.transcript, cfg, utt_seed);
      write_embeddings((fs::path(out_dir) / r.embedding_path).string(), seq.frames);
      m.records.push_back(std::move(r));
    }
    if (s > 0 && sizes[s] > 0) {
      const double frac = static_cast<double>(overlap) / sizes[s];
      if (s == 1) stats.dev_train_overlap = frac;
      if (s == 2) stats.test_train_overlap = frac;
    }
    save_manifest(m, (fs::path(out_dir) / (split_names[s] + ".tsv")).string());
  }
  return stats;
}

}  // namespace slp

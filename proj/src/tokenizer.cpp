#include "slp/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

namespace slp {

const std::vector<std::string>& Vocabulary::special_strings() {
  static const std::vector<std::string> s = {"[PAD]", "[UNK]", "[BOS]", "[SEP]",
                                             "[EOS]", "[MASK]", "[SLU]"};
  return s;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw std::runtime_error("vocab: id " + std::to_string(id) + " out of range " +
                             std::to_string(size()));
  return tokens[static_cast<std::size_t>(id)];
}

int Vocabulary::id_of(const std::string& tok) const {
  auto it = index.find(tok);
  return it == index.end() ? -1 : it->second;
}

std::string normalize_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        words.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

namespace {

void add_token(Vocabulary& v, const std::string& tok) {
  if (v.index.count(tok)) return;
  v.index[tok] = v.size();
  v.tokens.push_back(tok);
}

std::vector<std::string> word_to_symbols(const std::string& w) {
  std::vector<std::string> syms;
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::string s(1, w[i]);
    if (i > 0) s = "##" + s;
    syms.push_back(std::move(s));
  }
  return syms;
}

std::string merge_symbols(const std::string& a, const std::string& b) {
  // The continuation marker of the right piece is absorbed.
  if (b.rfind("##", 0) == 0) return a + b.substr(2);
  return a + b;
}

}  // namespace

Vocabulary train_vocab(const std::vector<std::string>& corpus, int target_size, int min_freq,
                       const std::vector<std::string>& atomic) {
  std::map<std::string, long long> word_freq;
  for (const std::string& line : corpus)
    for (const std::string& w : split_words(normalize_text(line))) word_freq[w] += 1;
  if (word_freq.empty()) throw std::runtime_error("train_vocab: empty corpus");

  Vocabulary v;
  for (const std::string& s : Vocabulary::special_strings()) add_token(v, s);
  for (const std::string& a : atomic) add_token(v, normalize_text(a));

  struct Word {
    std::vector<std::string> syms;
    long long freq;
  };
  std::vector<Word> words;
  words.reserve(word_freq.size());
  for (const auto& [w, f] : word_freq) words.push_back({word_to_symbols(w), f});

  for (const Word& w : words)
    for (const std::string& s : w.syms) add_token(v, s);
  if (v.size() > target_size)
    throw std::runtime_error("train_vocab: target_size " + std::to_string(target_size) +
                             " below base size " + std::to_string(v.size()) +
                             " (specials + atomics + characters)");

  while (v.size() < target_size) {
    std::map<std::pair<std::string, std::string>, long long> pair_freq;
    for (const Word& w : words)
      for (std::size_t i = 0; i + 1 < w.syms.size(); ++i)
        pair_freq[{w.syms[i], w.syms[i + 1]}] += w.freq;
    if (pair_freq.empty()) break;

    // Highest frequency wins; the std::map order breaks ties lexicographically
    // so training is deterministic.
    std::pair<std::string, std::string> best;
    long long best_freq = -1;
    for (const auto& [p, f] : pair_freq) {
      if (f > best_freq) {
        best_freq = f;
        best = p;
      }
    }
    if (best_freq < min_freq) break;

    const std::string merged = merge_symbols(best.first, best.second);
    add_token(v, merged);
    for (Word& w : words) {
      std::vector<std::string> out;
      out.reserve(w.syms.size());
      for (std::size_t i = 0; i < w.syms.size(); ++i) {
        if (i + 1 < w.syms.size() && w.syms[i] == best.first && w.syms[i + 1] == best.second) {
          out.push_back(merged);
          ++i;
        } else {
          out.push_back(w.syms[i]);
        }
      }
      w.syms = std::move(out);
    }
  }
  return v;
}

namespace {

// Greedy longest-match segmentation of one word. Returns false if stuck.
bool segment_word(const std::string& w, const Vocabulary& v, std::vector<int>* out) {
  std::vector<int> ids;
  std::size_t start = 0;
  while (start < w.size()) {
    int match = -1;
    std::size_t match_end = start;
    for (std::size_t end = w.size(); end > start; --end) {
      std::string sub = w.substr(start, end - start);
      if (start > 0) sub = "##" + sub;
      const int id = v.id_of(sub);
      if (id >= 0 && !v.is_special(id)) {
        match = id;
        match_end = end;
        break;
      }
    }
    if (match < 0) return false;
    ids.push_back(match);
    start = match_end;
  }
  out->insert(out->end(), ids.begin(), ids.end());
  return true;
}

bool segment_chars(const std::string& w, const Vocabulary& v, std::vector<int>* out) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::string s(1, w[i]);
    if (i > 0) s = "##" + s;
    const int id = v.id_of(s);
    if (id < 0 || v.is_special(id)) return false;
    ids.push_back(id);
  }
  out->insert(out->end(), ids.begin(), ids.end());
  return true;
}

}  // namespace

std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab) {
  std::vector<int> ids;
  for (const std::string& w : split_words(normalize_text(text))) {
    if (segment_word(w, vocab, &ids)) continue;
    if (segment_chars(w, vocab, &ids)) continue;
    ids.push_back(Vocabulary::kUnk);
  }
  return ids;
}

std::string detokenize(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::string out;
  for (int id : ids) {
    const std::string& tok = vocab.token(id);  // validates range
    if (id == Vocabulary::kPad) continue;
    if (tok.rfind("##", 0) == 0 && !out.empty() && out.back() != ' ') {
      out += tok.substr(2);
    } else {
      if (!out.empty()) out.push_back(' ');
      out += tok;
    }
  }
  return out;
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_vocab: cannot open " + path);
  f << "#slp-vocab v1\n";
  for (const std::string& t : vocab.tokens) f << t << "\n";
}

Vocabulary load_vocab(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_vocab: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "#slp-vocab v1")
    throw std::runtime_error("load_vocab: bad header in " + path);
  Vocabulary v;
  while (std::getline(f, line)) {
    if (v.index.count(line))
      throw std::runtime_error("load_vocab: duplicate token '" + line + "' in " + path);
    add_token(v, line);
  }
  const auto& sp = Vocabulary::special_strings();
  if (v.size() < static_cast<int>(sp.size()))
    throw std::runtime_error("load_vocab: vocabulary too small in " + path);
  for (std::size_t i = 0; i < sp.size(); ++i)
    if (v.tokens[i] != sp[i])
      throw std::runtime_error("load_vocab: special token order violated in " + path);
  return v;
}

}  // namespace slp

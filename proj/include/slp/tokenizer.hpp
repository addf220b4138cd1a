#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace slp {

// Subword vocabulary with WordPiece-style "##" continuations. Ids are dense,
// specials occupy the lowest ids in fixed order. Immutable once built.
struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kSep = 3;
  static constexpr int kEos = 4;
  static constexpr int kMask = 5;
  static constexpr int kSlu = 6;
  static constexpr int kNumSpecials = 7;

  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(tokens.size()); }
  bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }
  const std::string& token(int id) const;
  // -1 when absent.
  int id_of(const std::string& tok) const;

  static const std::vector<std::string>& special_strings();
};

// Lowercase, collapse runs of whitespace, trim ends.
std::string normalize_text(const std::string& text);

std::vector<std::string> split_words(const std::string& text);

// Frequency-greedy pair merging over the corpus words, emitting whole-word
// and "##"-continuation subwords. atomic entries (control tokens, slot type
// names) are inserted verbatim so they always tokenize to a single id.
Vocabulary train_vocab(const std::vector<std::string>& corpus, int target_size, int min_freq,
                       const std::vector<std::string>& atomic = {});

// Greedy longest-match-first per word; falls back to character pieces, then
// [UNK]. Never emits special ids.
std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab);

std::string detokenize(const std::vector<int>& ids, const Vocabulary& vocab);

void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

}  // namespace slp

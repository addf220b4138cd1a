#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace slp {

// Structured meaning of one utterance: one or more intent labels plus an
// ordered list of (slot type, slot value) pairs.
struct SemanticFrame {
  std::vector<std::string> intents;
  std::vector<std::pair<std::string, std::string>> slots;

  bool operator==(const SemanticFrame&) const = default;
};

// "intent1+intent2 & type1 value1 & type2 value2 ..."
std::string linearize(const SemanticFrame& frame);

struct FrameParse {
  SemanticFrame frame;
  std::vector<std::string> anomalies;
};

// Tolerant inverse of linearize. Unknown labels and malformed fields are
// dropped and recorded as anomalies; never throws. Empty label sets disable
// the corresponding validation.
FrameParse parse_frame(const std::string& text, const std::set<std::string>& intent_set,
                       const std::set<std::string>& slot_type_set);

// Unit-cost word-level Levenshtein distance.
long long word_edit_distance(const std::vector<std::string>& ref,
                             const std::vector<std::string>& hyp);

// Word-level edit distance divided by reference length. Throws on empty ref.
double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

struct EvalReport {
  long long n_utts = 0;

  bool has_wer = false;
  double wer = 0.0;
  long long ref_words = 0;
  long long word_edits = 0;

  double intent_acc = 0.0;
  long long intent_correct = 0;

  // Slot metrics are absent (not zero) when neither side carries slots.
  bool has_slots = false;
  double slot_precision = 0.0;
  double slot_recall = 0.0;
  double slot_f1 = 0.0;
  long long ref_slots = 0;
  long long hyp_slots = 0;
  long long matched_slots = 0;

  std::string to_text() const;  // metric<TAB>value lines + one #record line
  std::string to_json() const;
};

// Intent accuracy (intent-set equality) and multiset slot precision/recall/F1
// micro-averaged over the corpus. Inputs are aligned by index.
EvalReport score(const std::vector<SemanticFrame>& refs, const std::vector<SemanticFrame>& hyps);

}  // namespace slp

#include "slp/slu_codec.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "slp/tokenizer.hpp"

namespace slp {

namespace {

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = s.find(sep, pos);
    if (hit == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, hit - pos));
    pos = hit + sep.size();
  }
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string linearize(const SemanticFrame& frame) {
  std::string out;
  for (std::size_t i = 0; i < frame.intents.size(); ++i) {
    if (i) out += "+";
    out += frame.intents[i];
  }
  for (const auto& [type, value] : frame.slots) {
    out += " & ";
    out += type;
    out += " ";
    out += value;
  }
  return out;
}

FrameParse parse_frame(const std::string& text, const std::set<std::string>& intent_set,
                       const std::set<std::string>& slot_type_set) {
  FrameParse res;
  const std::vector<std::string> fields = split_on(text, " & ");

  for (const std::string& intent : split_on(fields[0], "+")) {
    const std::string t = normalize_text(intent);
    if (t.empty()) {
      res.anomalies.push_back("empty intent field");
      continue;
    }
    if (!intent_set.empty() && !intent_set.count(t)) {
      res.anomalies.push_back("unknown intent '" + t + "'");
      continue;
    }
    res.frame.intents.push_back(t);
  }
  if (res.frame.intents.empty() && res.anomalies.empty())
    res.anomalies.push_back("empty intent field");

  for (std::size_t i = 1; i < fields.size(); ++i) {
    const std::vector<std::string> words = split_words(normalize_text(fields[i]));
    if (words.empty()) {
      res.anomalies.push_back("empty slot field");
      continue;
    }
    const std::string& type = words[0];
    if (!slot_type_set.empty() && !slot_type_set.count(type)) {
      res.anomalies.push_back("unknown slot type '" + type + "'");
      continue;
    }
    if (words.size() < 2) {
      res.anomalies.push_back("slot '" + type + "' has no value");
      continue;
    }
    std::string value = words[1];
    for (std::size_t j = 2; j < words.size(); ++j) value += " " + words[j];
    res.frame.slots.emplace_back(type, value);
  }
  return res;
}

long long word_edit_distance(const std::vector<std::string>& ref,
                             const std::vector<std::string>& hyp) {
  const std::size_t m = ref.size(), n = hyp.size();
  std::vector<long long> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<long long>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<long long>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      const long long sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  if (ref.empty()) throw std::runtime_error("wer: empty reference");
  return static_cast<double>(word_edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

EvalReport score(const std::vector<SemanticFrame>& refs, const std::vector<SemanticFrame>& hyps) {
  if (refs.size() != hyps.size())
    throw std::runtime_error("score: " + std::to_string(refs.size()) + " refs vs " +
                             std::to_string(hyps.size()) + " hyps");
  EvalReport r;
  r.n_utts = static_cast<long long>(refs.size());

  for (std::size_t i = 0; i < refs.size(); ++i) {
    std::set<std::string> ri(refs[i].intents.begin(), refs[i].intents.end());
    std::set<std::string> hi(hyps[i].intents.begin(), hyps[i].intents.end());
    if (ri == hi) r.intent_correct += 1;

    std::map<std::pair<std::string, std::string>, long long> rc;
    for (const auto& s : refs[i].slots) rc[s] += 1;
    r.ref_slots += static_cast<long long>(refs[i].slots.size());
    r.hyp_slots += static_cast<long long>(hyps[i].slots.size());
    std::map<std::pair<std::string, std::string>, long long> hc;
    for (const auto& s : hyps[i].slots) hc[s] += 1;
    for (const auto& [slot, cnt] : hc) {
      auto it = rc.find(slot);
      if (it != rc.end()) r.matched_slots += std::min(cnt, it->second);
    }
  }
  r.intent_acc = r.n_utts > 0 ? static_cast<double>(r.intent_correct) / r.n_utts : 0.0;

  r.has_slots = (r.ref_slots + r.hyp_slots) > 0;
  if (r.has_slots) {
    r.slot_precision =
        r.hyp_slots > 0 ? static_cast<double>(r.matched_slots) / r.hyp_slots : 0.0;
    r.slot_recall = r.ref_slots > 0 ? static_cast<double>(r.matched_slots) / r.ref_slots : 0.0;
    const double pr = r.slot_precision + r.slot_recall;
    r.slot_f1 = pr > 0.0 ? 2.0 * r.slot_precision * r.slot_recall / pr : 0.0;
  }
  return r;
}

std::string EvalReport::to_text() const {
  std::string out;
  out += "utterances\t" + std::to_string(n_utts) + "\n";
  if (has_wer) {
    out += "wer\t" + fmt6(wer) + "\n";
    out += "ref_words\t" + std::to_string(ref_words) + "\n";
    out += "word_edits\t" + std::to_string(word_edits) + "\n";
  }
  out += "intent_acc\t" + fmt6(intent_acc) + "\n";
  out += "intent_correct\t" + std::to_string(intent_correct) + "\n";
  if (has_slots) {
    out += "slot_precision\t" + fmt6(slot_precision) + "\n";
    out += "slot_recall\t" + fmt6(slot_recall) + "\n";
    out += "slot_f1\t" + fmt6(slot_f1) + "\n";
    out += "ref_slots\t" + std::to_string(ref_slots) + "\n";
    out += "hyp_slots\t" + std::to_string(hyp_slots) + "\n";
    out += "matched_slots\t" + std::to_string(matched_slots) + "\n";
  } else {
    out += "slots\tabsent\n";
  }
  out += "#record utts=" + std::to_string(n_utts);
  if (has_wer) out += " wer=" + fmt6(wer);
  out += " intent_acc=" + fmt6(intent_acc);
  if (has_slots)
    out += " slot_precision=" + fmt6(slot_precision) + " slot_recall=" + fmt6(slot_recall) +
           " slot_f1=" + fmt6(slot_f1);
  out += "\n";
  return out;
}

std::string EvalReport::to_json() const {
  std::string out = "{";
  out += "\"utterances\":" + std::to_string(n_utts);
  if (has_wer) out += ",\"wer\":" + fmt6(wer);
  out += ",\"intent_acc\":" + fmt6(intent_acc);
  if (has_slots) {
    out += ",\"slot_precision\":" + fmt6(slot_precision);
    out += ",\"slot_recall\":" + fmt6(slot_recall);
    out += ",\"slot_f1\":" + fmt6(slot_f1);
  } else {
    out += ",\"slots\":null";
  }
  out += "}";
  return out;
}

}  // namespace slp

#include <cmath>

#include "doctest.h"
#include "slp/slu_codec.hpp"

using namespace slp;

TEST_CASE("linearize: multi-slot frame in field order") {
  const SemanticFrame f{{"flight_info"},
                        {{"from_city", "pittsburgh"},
                         {"to_city", "baltimore"},
                         {"depart_date", "thursday"},
                         {"depart_time", "morning"}}};
  CHECK(linearize(f) ==
        "flight_info & from_city pittsburgh & to_city baltimore & depart_date thursday & "
        "depart_time morning");
}

TEST_CASE("linearize: slotless and multi-intent frames") {
  CHECK(linearize({{"i"}, {}}) == "i");
  CHECK(linearize({{"a", "b"}, {{"t", "v"}}}) == "a+b & t v");
}

TEST_CASE("parse: tolerant handling of malformed fields") {
  const std::set<std::string> intents = {"flight_info"};
  const std::set<std::string> types = {"from_city"};

  const FrameParse missing_value = parse_frame("flight_info & from_city", intents, types);
  CHECK(missing_value.frame.intents == std::vector<std::string>{"flight_info"});
  CHECK(missing_value.frame.slots.empty());
  CHECK(missing_value.anomalies.size() == 1);

  const FrameParse empty = parse_frame("", intents, types);
  CHECK(empty.frame.intents.empty());
  CHECK_FALSE(empty.anomalies.empty());

  const FrameParse unknown = parse_frame("bogus & elsewhere here", intents, types);
  CHECK(unknown.frame.intents.empty());
  CHECK(unknown.frame.slots.empty());
  CHECK(unknown.anomalies.size() == 2);
}

TEST_CASE("wer: identity, single substitution, empty-ref error") {
  CHECK(wer({"a", "b", "c"}, {"a", "b", "c"}) == 0.0);
  CHECK(wer({"a", "b", "c", "d"}, {"a", "x", "c", "d"}) == doctest::Approx(0.25));
  CHECK(wer({"a"}, {}) == 1.0);
  CHECK_THROWS(wer({}, {"a"}));
}

TEST_CASE("score: perfect hypotheses give all ones") {
  const std::vector<SemanticFrame> frames = {
      {{"i1"}, {{"t", "v"}}},
      {{"i2", "i3"}, {{"t", "v"}, {"t", "w"}}},
  };
  const EvalReport r = score(frames, frames);
  CHECK(r.intent_acc == 1.0);
  CHECK(r.slot_precision == 1.0);
  CHECK(r.slot_recall == 1.0);
  CHECK(r.slot_f1 == 1.0);
}

TEST_CASE("score: one of two reference slots matched") {
  const std::vector<SemanticFrame> refs = {{{"i"}, {{"a", "x"}, {"b", "y"}}}};
  const std::vector<SemanticFrame> hyps = {{{"i"}, {{"a", "x"}}}};
  const EvalReport r = score(refs, hyps);
  CHECK(r.slot_precision == 1.0);
  CHECK(r.slot_recall == 0.5);
  CHECK(r.slot_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(r.slot_f1 - 2 * r.slot_precision * r.slot_recall /
                                (r.slot_precision + r.slot_recall)) < 1e-12);
}

TEST_CASE("score: intent comparison is set equality") {
  const std::vector<SemanticFrame> refs = {{{"a", "b"}, {}}};
  CHECK(score(refs, {{{"b", "a"}, {}}}).intent_acc == 1.0);
  CHECK(score(refs, {{{"a"}, {}}}).intent_acc == 0.0);
}

TEST_CASE("score: duplicated pairs match as a multiset") {
  const std::vector<SemanticFrame> refs = {{{"i"}, {{"t", "v"}, {"t", "v"}}}};
  const std::vector<SemanticFrame> hyps = {{{"i"}, {{"t", "v"}, {"t", "v"}, {"t", "v"}}}};
  const EvalReport r = score(refs, hyps);
  CHECK(r.matched_slots == 2);
  CHECK(r.ref_slots == 2);
  CHECK(r.hyp_slots == 3);
}

TEST_CASE("score: permuting hypothesis slots changes nothing") {
  const std::vector<SemanticFrame> refs = {{{"i"}, {{"a", "x"}, {"b", "y"}, {"c", "z"}}}};
  const std::vector<SemanticFrame> h1 = {{{"i"}, {{"c", "z"}, {"a", "x"}, {"b", "y"}}}};
  const std::vector<SemanticFrame> h2 = {{{"i"}, {{"a", "x"}, {"b", "y"}, {"c", "z"}}}};
  const EvalReport r1 = score(refs, h1);
  const EvalReport r2 = score(refs, h2);
  CHECK(r1.slot_precision == r2.slot_precision);
  CHECK(r1.slot_recall == r2.slot_recall);
  CHECK(r1.slot_f1 == r2.slot_f1);
}

TEST_CASE("score: slotless corpora report slots as absent") {
  const std::vector<SemanticFrame> refs = {{{"a"}, {}}, {{"b"}, {}}};
  const EvalReport r = score(refs, refs);
  CHECK_FALSE(r.has_slots);
  CHECK(r.to_text().find("slots\tabsent") != std::string::npos);
}

TEST_CASE("score: length mismatch is an error") {
  CHECK_THROWS(score({{{"a"}, {}}}, {}));
}

TEST_CASE("report serialization carries a machine-readable record line") {
  const std::vector<SemanticFrame> refs = {{{"a"}, {{"t", "v"}}}};
  EvalReport r = score(refs, refs);
  r.has_wer = true;
  r.wer = 0.125;
  const std::string text = r.to_text();
  CHECK(text.find("intent_acc\t1.000000") != std::string::npos);
  CHECK(text.find("#record ") != std::string::npos);
  CHECK(r.to_json().find("\"slot_f1\":1.000000") != std::string::npos);
}

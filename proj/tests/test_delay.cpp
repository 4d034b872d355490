#include <doctest.h>

#include <cstdint>
#include <string>
#include <vector>

#include "rtstt/delay.hpp"

using namespace rtstt;

namespace {

Timeline three_word_segment(double start_s) {
  Timeline t;
  t.entries.push_back({"alpha", start_s, start_s + 0.3, 0});
  t.entries.push_back({"beta", start_s + 0.3, start_s + 0.6, 0});
  t.entries.push_back({"gamma", start_s + 0.6, start_s + 0.9, 0});
  return t;
}

TranscriptEvent event_with(std::uint32_t seq, std::int64_t arrival_ts_ms,
                           std::vector<std::string> tokens) {
  TranscriptEvent ev;
  ev.seq = seq;
  ev.arrival_ts_ms = arrival_ts_ms;
  ev.measured_tokens = std::move(tokens);
  for (const auto& t : ev.measured_tokens) {
    if (!ev.text.empty()) ev.text += ' ';
    ev.text += t;
  }
  return ev;
}

}  // namespace

TEST_SUITE("delay") {

TEST_CASE("a matched first word yields arrival minus start minus spoken time") {
  const Timeline ref = three_word_segment(3.0);
  const std::vector<TranscriptEvent> events = {
      event_with(0, 4802, {"alpha", "beta", "gamma"})};

  const auto measures = measure_delays(ref, events, SearchParams{}, 100);
  REQUIRE(measures.size() == 1);
  CHECK(measures[0].word == "alpha");
  CHECK(measures[0].ref_time_s == doctest::Approx(3.0));
  CHECK(measures[0].classification == DelayClass::Found);
  CHECK(measures[0].delay_ms == doctest::Approx(1702.0));
  CHECK(measures[0].arrival_ts_ms == 4802);
}

TEST_CASE("matching is case-insensitive") {
  const Timeline ref = three_word_segment(1.0);
  const std::vector<TranscriptEvent> events = {
      event_with(0, 3000, {"Alpha", "BETA", "Gamma"})};
  const auto measures = measure_delays(ref, events, SearchParams{}, 0);
  REQUIRE(measures.size() == 1);
  CHECK(measures[0].classification == DelayClass::Found);
}

TEST_CASE("a word without its full context does not count as found") {
  const Timeline ref = three_word_segment(1.0);
  const std::vector<TranscriptEvent> events = {
      event_with(0, 3000, {"alpha", "beta"}),  // gamma missing
      event_with(1, 5000, {"alpha", "other"})};
  const auto measures = measure_delays(ref, events, SearchParams{}, 0);
  REQUIRE(measures.size() == 1);
  CHECK(measures[0].classification == DelayClass::ContextNotFound);
}

TEST_CASE("a word that never arrives is reported missing") {
  const Timeline ref = three_word_segment(1.0);
  const std::vector<TranscriptEvent> events = {
      event_with(0, 3000, {"beta", "gamma"}),  // context without the word
      event_with(1, 5000, {"delta"})};
  const auto measures = measure_delays(ref, events, SearchParams{}, 0);
  REQUIRE(measures.size() == 1);
  CHECK(measures[0].classification == DelayClass::WordNotFound);
}

TEST_CASE("empty event lists mark every searched word missing") {
  Timeline ref = three_word_segment(1.0);
  ref.entries.push_back({"delta", 4.0, 4.3, 1});
  ref.entries.push_back({"epsilon", 4.3, 4.6, 1});
  const auto measures = measure_delays(ref, {}, SearchParams{}, 0);
  REQUIRE(measures.size() == 2);
  CHECK(measures[0].classification == DelayClass::WordNotFound);
  CHECK(measures[1].classification == DelayClass::WordNotFound);
}

TEST_CASE("only words searchable in an event count, not its display text") {
  const Timeline ref = three_word_segment(1.0);
  TranscriptEvent ev;  // rewrites display the word but carry no searchable tokens
  ev.arrival_ts_ms = 3000;
  ev.text = "alpha beta gamma";
  const std::vector<TranscriptEvent> events = {ev};
  const auto measures = measure_delays(ref, events, SearchParams{}, 0);
  REQUIRE(measures.size() == 1);
  CHECK(measures[0].classification == DelayClass::WordNotFound);
}

TEST_CASE("a repeated phrase arriving before it was spoken is a false positive") {
  Timeline ref = three_word_segment(1.0);
  ref.entries.push_back({"delta", 10.0, 10.25, 1});
  ref.entries.push_back({"epsilon", 10.25, 10.5, 1});
  ref.entries.push_back({"zeta", 10.5, 10.75, 1});

  const std::vector<TranscriptEvent> events = {
      event_with(0, 2000, {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"}),
      event_with(1, 12000, {"delta", "epsilon", "zeta"})};

  const auto measures = measure_delays(ref, events, SearchParams{}, 0);
  REQUIRE(measures.size() == 2);
  CHECK(measures[0].classification == DelayClass::Found);
  CHECK(measures[0].delay_ms == doctest::Approx(1000.0));
  CHECK(measures[1].classification == DelayClass::FalsePositive);
  CHECK(measures[1].delay_ms == doctest::Approx(2000.0 - 10000.0));

  const DelaySummary summary = summarize_delays(measures);
  CHECK(summary.n_found == 1);
  CHECK(summary.n_false_positive == 1);
  REQUIRE(summary.mean_delay_ms.has_value());
  CHECK(*summary.mean_delay_ms == doctest::Approx(1000.0));  // excludes the negative
  CHECK(summary.words_searched() == 2);
}

TEST_CASE("the search window widens until the match appears, then resets") {
  Timeline ref;
  ref.entries.push_back({"late", 1.0, 1.3, 0});
  ref.entries.push_back({"pair", 1.3, 1.6, 0});
  ref.entries.push_back({"second", 2.0, 2.3, 1});
  ref.entries.push_back({"word", 2.3, 2.6, 1});

  std::vector<TranscriptEvent> events;
  for (int i = 0; i < 4; ++i) {
    events.push_back(event_with(static_cast<std::uint32_t>(i), 1000 * (i + 1),
                                {"filler" + std::to_string(i)}));
  }
  events.push_back(event_with(4, 5000, {"late", "pair", "second", "word"}));

  SearchParams params;
  params.search_width = 2;
  params.widen_step = 1;
  params.context_radius = 1;

  const auto measures = measure_delays(ref, events, params, 0);
  REQUIRE(measures.size() == 2);
  // "late" sits beyond the initial two-event window; widening reaches it.
  CHECK(measures[0].classification == DelayClass::Found);
  CHECK(measures[0].delay_ms == doctest::Approx(4000.0));
  // The next search resumes at the matched event, inside the reset window.
  CHECK(measures[1].classification == DelayClass::Found);
  CHECK(measures[1].delay_ms == doctest::Approx(3000.0));
}

TEST_CASE("only the first word of each segment is searched") {
  Timeline ref;
  ref.entries.push_back({"one", 0.0, 0.3, 0});
  ref.entries.push_back({"two", 0.3, 0.6, 0});
  ref.entries.push_back({"three", 1.0, 1.3, 1});
  ref.entries.push_back({"four", 1.3, 1.6, 1});
  ref.entries.push_back({"five", 2.0, 2.3, 2});

  const std::vector<TranscriptEvent> events = {
      event_with(0, 4000, {"one", "two", "three", "four", "five"})};
  const auto measures = measure_delays(ref, events, SearchParams{}, 0);
  REQUIRE(measures.size() == 3);
  CHECK(measures[0].word == "one");
  CHECK(measures[1].word == "three");
  CHECK(measures[2].word == "five");
}

TEST_CASE("context clips at the timeline edges") {
  Timeline ref;  // a single two-word segment: radius 2 exceeds both edges
  ref.entries.push_back({"solo", 1.0, 1.3, 0});
  ref.entries.push_back({"pair", 1.3, 1.6, 0});
  const std::vector<TranscriptEvent> events = {
      event_with(0, 3000, {"solo", "pair"})};
  const auto measures = measure_delays(ref, events, SearchParams{}, 0);
  REQUIRE(measures.size() == 1);
  CHECK(measures[0].classification == DelayClass::Found);
}

TEST_CASE("summaries average found delays and partition the counts") {
  std::vector<DelayMeasurement> measures(2);
  measures[0].classification = DelayClass::Found;
  measures[0].delay_ms = 1000.0;
  measures[1].classification = DelayClass::Found;
  measures[1].delay_ms = 2000.0;
  DelaySummary s = summarize_delays(measures);
  REQUIRE(s.mean_delay_ms.has_value());
  CHECK(*s.mean_delay_ms == doctest::Approx(1500.0));
  CHECK(s.n_found == 2);
  CHECK(s.words_searched() == 2);

  DelaySummary empty = summarize_delays({});
  CHECK_FALSE(empty.mean_delay_ms.has_value());
  CHECK(empty.words_searched() == 0);

  std::vector<DelayMeasurement> mixed(4);
  mixed[0].classification = DelayClass::Found;
  mixed[0].delay_ms = 500.0;
  mixed[1].classification = DelayClass::WordNotFound;
  mixed[2].classification = DelayClass::ContextNotFound;
  mixed[3].classification = DelayClass::FalsePositive;
  mixed[3].delay_ms = -800.0;
  DelaySummary m = summarize_delays(mixed);
  CHECK(m.n_found == 1);
  CHECK(m.n_word_not_found == 1);
  CHECK(m.n_context_not_found == 1);
  CHECK(m.n_false_positive == 1);
  CHECK(m.words_searched() == 4);
  REQUIRE(m.mean_delay_ms.has_value());
  CHECK(*m.mean_delay_ms == doctest::Approx(500.0));
}

TEST_CASE("delay breakdown totals its parts") {
  const DelayBreakdown b = make_breakdown(1000.0, 503.0, 0.0);
  CHECK(b.d_total_ms == doctest::Approx(1503.0));
}

TEST_CASE("classification names render for reports") {
  CHECK(to_string(DelayClass::Found) == "found");
  CHECK(to_string(DelayClass::WordNotFound) == "word_not_found");
  CHECK(to_string(DelayClass::ContextNotFound) == "context_not_found");
  CHECK(to_string(DelayClass::FalsePositive) == "false_positive");
}

TEST_CASE("dominance needs strict wins on both axes") {
  // The published quality/delay pairs these checks mirror.
  const QualityDelayPoint tiny_feedback{0.2908, 2000.0};
  const QualityDelayPoint tiny_fixed3{0.3050, 2244.0};
  const QualityDelayPoint tiny_fixed2{0.3458, 1702.0};
  const QualityDelayPoint tiny_vad{0.2551, 3521.0};

  CHECK(dominates(tiny_feedback, tiny_fixed3));
  CHECK_FALSE(dominates(tiny_fixed3, tiny_feedback));

  // Lower error but slower, or faster but worse: incomparable.
  CHECK_FALSE(dominates(tiny_fixed2, tiny_vad));
  CHECK_FALSE(dominates(tiny_vad, tiny_fixed2));

  const QualityDelayPoint p{0.3, 2000.0};
  CHECK_FALSE(dominates(p, p));
  CHECK_FALSE(dominates({0.3, 1500.0}, {0.3, 2000.0}));  // equal quality
  CHECK_FALSE(dominates({0.2, 2000.0}, {0.3, 2000.0}));  // equal delay
}

}  // TEST_SUITE

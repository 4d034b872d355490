#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtstt/audio.hpp"
#include "rtstt/merge.hpp"

namespace rtstt {

enum class DelayClass { Found, WordNotFound, ContextNotFound, FalsePositive };

std::string to_string(DelayClass c);

// One searched reference word. arrival_ts_ms / delay_ms only carry meaning
// for Found and FalsePositive (a match whose computed delay was negative).
struct DelayMeasurement {
  std::string word;
  double ref_time_s = 0.0;
  std::int64_t arrival_ts_ms = 0;
  double delay_ms = 0.0;
  DelayClass classification = DelayClass::WordNotFound;
};

// Additive decomposition of end-to-end delay.
struct DelayBreakdown {
  double d_s_ms = 0.0;  // buffering until a fragment is cut
  double d_p_ms = 0.0;  // recognition processing
  double d_t_ms = 0.0;  // transmission
  double d_total_ms = 0.0;
};

inline DelayBreakdown make_breakdown(double d_s_ms, double d_p_ms, double d_t_ms) {
  return {d_s_ms, d_p_ms, d_t_ms, d_s_ms + d_p_ms + d_t_ms};
}

struct SearchParams {
  int search_width = 10;   // initial window, in hypothesis segments
  int widen_step = 5;      // growth when the window misses
  int context_radius = 2;  // reference words required on each side
};

// Per-segment first-word delay search over arrived transcript events.
// Words are matched case-insensitively against each event's searchable
// tokens; a match also requires the word's reference context inside the
// same event. The window starts at the last matched event and only resets
// its width on a match.
std::vector<DelayMeasurement> measure_delays(const Timeline& ref,
                                             std::span<const TranscriptEvent> events,
                                             const SearchParams& params,
                                             std::int64_t stream_start_ts_ms);

struct DelaySummary {
  std::optional<double> mean_delay_ms;  // over Found only; absent when none
  int n_found = 0;
  int n_word_not_found = 0;
  int n_context_not_found = 0;
  int n_false_positive = 0;

  int words_searched() const {
    return n_found + n_word_not_found + n_context_not_found + n_false_positive;
  }
};

DelaySummary summarize_delays(std::span<const DelayMeasurement> measures);

// One experiment's position in the quality/delay plane.
struct QualityDelayPoint {
  double wer = 0.0;
  double delay_ms = 0.0;
};

// Strictly better on both axes; assumes both points were measured under the
// same latency model and transport settings.
bool dominates(const QualityDelayPoint& c1, const QualityDelayPoint& c2);

}  // namespace rtstt

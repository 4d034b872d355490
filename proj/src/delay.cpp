#include "rtstt/delay.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace rtstt {

namespace {

std::string fold(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct SearchedWord {
  std::string token;                  // folded
  double ref_time_s = 0.0;
  std::vector<std::string> context;   // folded neighbors within the radius
};

}  // namespace

std::string to_string(DelayClass c) {
  switch (c) {
    case DelayClass::Found: return "found";
    case DelayClass::WordNotFound: return "word_not_found";
    case DelayClass::ContextNotFound: return "context_not_found";
    case DelayClass::FalsePositive: return "false_positive";
  }
  return "unknown";
}

std::vector<DelayMeasurement> measure_delays(const Timeline& ref,
                                             std::span<const TranscriptEvent> events,
                                             const SearchParams& params,
                                             std::int64_t stream_start_ts_ms) {
  // Token sets per hypothesis segment; one event == one segment.
  std::vector<std::unordered_set<std::string>> event_tokens;
  event_tokens.reserve(events.size());
  for (const TranscriptEvent& ev : events) {
    std::unordered_set<std::string> set;
    for (const std::string& tok : ev.measured_tokens) set.insert(fold(tok));
    event_tokens.push_back(std::move(set));
  }

  // First word of each reference segment, with surrounding context words.
  std::vector<SearchedWord> searched;
  std::unordered_set<int> seen_segments;
  for (size_t idx = 0; idx < ref.entries.size(); ++idx) {
    const WordTiming& wt = ref.entries[idx];
    if (!seen_segments.insert(wt.segment_id).second) continue;
    SearchedWord sw;
    sw.token = fold(wt.word);
    sw.ref_time_s = wt.start_s;
    const size_t lo = idx >= static_cast<size_t>(params.context_radius)
                          ? idx - static_cast<size_t>(params.context_radius)
                          : 0;
    const size_t hi =
        std::min(ref.entries.size(), idx + static_cast<size_t>(params.context_radius) + 1);
    for (size_t k = lo; k < hi; ++k) {
      if (k != idx) sw.context.push_back(fold(ref.entries[k].word));
    }
    searched.push_back(std::move(sw));
  }

  std::vector<DelayMeasurement> out;
  out.reserve(searched.size());
  const size_t n_events = events.size();
  size_t search_index = 0;
  int width = params.search_width;

  for (const SearchedWord& sw : searched) {
    DelayMeasurement m;
    m.word = sw.token;
    m.ref_time_s = sw.ref_time_s;
    bool word_seen = false;
    bool resolved = false;
    while (!resolved) {
      const size_t end = std::min(n_events, search_index + static_cast<size_t>(width));
      for (size_t i = search_index; i < end; ++i) {
        if (!event_tokens[i].contains(sw.token)) continue;
        word_seen = true;
        const bool context_ok =
            std::all_of(sw.context.begin(), sw.context.end(),
                        [&](const std::string& c) { return event_tokens[i].contains(c); });
        if (!context_ok) continue;
        m.arrival_ts_ms = events[i].arrival_ts_ms;
        m.delay_ms = static_cast<double>(events[i].arrival_ts_ms - stream_start_ts_ms) -
                     sw.ref_time_s * 1000.0;
        m.classification =
            m.delay_ms < 0.0 ? DelayClass::FalsePositive : DelayClass::Found;
        search_index = i;             // next word resumes at the matched segment
        width = params.search_width;  // width resets only on a match
        resolved = true;
        break;
      }
      if (resolved) break;
      if (end >= n_events) {  // window already reaches the last event
        m.classification =
            word_seen ? DelayClass::ContextNotFound : DelayClass::WordNotFound;
        resolved = true;
      } else {
        width += params.widen_step;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

DelaySummary summarize_delays(std::span<const DelayMeasurement> measures) {
  DelaySummary s;
  double sum = 0.0;
  for (const DelayMeasurement& m : measures) {
    switch (m.classification) {
      case DelayClass::Found:
        ++s.n_found;
        sum += m.delay_ms;
        break;
      case DelayClass::WordNotFound:
        ++s.n_word_not_found;
        break;
      case DelayClass::ContextNotFound:
        ++s.n_context_not_found;
        break;
      case DelayClass::FalsePositive:
        ++s.n_false_positive;
        break;
    }
  }
  if (s.n_found > 0) s.mean_delay_ms = sum / s.n_found;
  return s;
}

bool dominates(const QualityDelayPoint& c1, const QualityDelayPoint& c2) {
  return c1.wer < c2.wer && c1.delay_ms < c2.delay_ms;
}

}  // namespace rtstt

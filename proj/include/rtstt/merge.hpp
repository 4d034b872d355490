#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rtstt {

// One ASR response. All of its words share the arrival timestamp;
// measured_tokens holds the words eligible for delay search (net-new words
// only when a merge ran, every token otherwise).
struct TranscriptEvent {
  uint32_t seq = 0;
  std::string text;
  int64_t arrival_ts_ms = 0;
  std::vector<std::string> measured_tokens;
  bool error = false;
};

// Stable words were appended as genuinely new speech and carry a meaningful
// arrival stamp; Replaced words are rewrites of previously transcribed text
// and are excluded from delay measurement.
enum class Provenance { Stable, Replaced };

struct TranscriptWord {
  std::string token;
  int64_t arrival_ts_ms = 0;
  Provenance provenance = Provenance::Stable;
};

struct MergeParams {
  int n_words = 7;        // tail length searched in the previous transcription
  int words_checked = 2;  // consecutive words that must match exactly
};

struct RollingTranscript {
  std::vector<TranscriptWord> words;
  MergeParams params;
};

struct MergeResult {
  int replaced_count = 0;               // words removed from the old tail
  std::vector<std::string> removed;     // the removed words, for bookkeeping
  std::vector<std::string> appended;    // every token added by this merge
  std::vector<std::string> net_new;     // appended tokens stamped arrival_ts_ms
};

// Compares the last n_words of `transcript` with `new_words`; on an exact
// match of words_checked consecutive tokens (case-folded), the transcript is
// replaced by the new text from that point. The rightmost match in new_words
// wins, ties broken by the earliest tail position. Without a match the new
// words are appended whole. Only appended words beyond the replaced count are
// stamped with arrival_ts_ms; the rest are rewrites marked Replaced.
MergeResult merge_transcription(RollingTranscript& transcript,
                                std::span<const std::string> new_words,
                                int64_t arrival_ts_ms);

std::vector<std::string> tokenize(const std::string& text);

// Rendered transcript: all live tokens joined by single spaces.
std::string render_transcript(const RollingTranscript& transcript);

// Drops events whose normalized text repeats the previously kept event,
// the silence artifact filter. Non-adjacent repeats are kept.
std::vector<std::string> dedup_repetition_artifact(
    std::span<const std::string> events);

std::vector<TranscriptEvent> dedup_repetition_artifact(
    std::span<const TranscriptEvent> events);

}  // namespace rtstt

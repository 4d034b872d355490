#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtstt/audio.hpp"

namespace rtstt {

// --- Fixed interval -------------------------------------------------------
//
// Buffers incoming samples and releases one fragment per full interval.
// Emission is lossless: emitted fragments plus the residual always equal
// the pushed stream.

struct FixedSplitterState {
  double interval_s = 2.0;
  std::vector<int16_t> buffer;
  uint32_t next_seq = 0;
  int64_t consumed_samples = 0;  // samples already emitted, for capture offsets

  size_t max_samples() const;
};

std::vector<AudioFragment> fixed_push(FixedSplitterState& state,
                                      std::span<const int16_t> samples);

// End-of-stream drain: releases the residual as one short fragment.
std::optional<AudioFragment> fixed_flush(FixedSplitterState& state);

// --- VAD ------------------------------------------------------------------
//
// Two-state silence/voice machine over fixed-size RMS frames. Samples are
// stored in both states; the whole buffer is released on the voice-to-silence
// transition. A frame is voiced iff its RMS exceeds energy_threshold, and a
// mode flip requires hangover_frames consecutive opposing frames.

enum class VadMode { Silence, Voice };

struct VadState {
  VadMode mode = VadMode::Silence;
  std::vector<int16_t> buffer;
  int frame_ms = 10;
  double energy_threshold = 0.0;
  int hangover_frames = 30;
  uint32_t next_seq = 0;

  int64_t buffer_start_sample = 0;
  int opposing_run = 0;   // consecutive frames disagreeing with mode
  size_t frame_cursor = 0;  // buffer offset of the first unscored frame

  size_t frame_samples() const;
};

std::vector<AudioFragment> vad_push(VadState& state,
                                    std::span<const int16_t> samples);

std::optional<AudioFragment> vad_flush(VadState& state);

// 4x the RMS of the first 100 ms; the default when no threshold is given.
double vad_calibrate_threshold(std::span<const int16_t> leading_samples);

// --- Feedback -------------------------------------------------------------

struct FeedbackSplitterConfig {
  double interval_s = 2.0;         // fixed-interval cadence underneath
  double feedback_window_s = 4.0;  // trailing context sent per fragment
};

// Returns the trailing window ending at `fragment`'s last sample:
// min(total history, feedback_window_s) seconds. `previous` holds the stream
// samples immediately preceding the fragment (it may be longer than needed).
// The window's suffix is bit-identical to the fragment's samples.
AudioFragment feedback_window(std::span<const int16_t> previous,
                              const AudioFragment& fragment,
                              const FeedbackSplitterConfig& cfg);

// Fixed-interval front end plus rolling history; push yields window fragments.
class FeedbackSplitter {
 public:
  explicit FeedbackSplitter(const FeedbackSplitterConfig& cfg);

  std::vector<AudioFragment> push(std::span<const int16_t> samples);
  std::optional<AudioFragment> flush();

 private:
  AudioFragment window_for(const AudioFragment& fragment);

  FeedbackSplitterConfig cfg_;
  FixedSplitterState fixed_;
  std::vector<int16_t> history_;  // trailing samples before the pending fragment
};

// --- Driver-facing configuration -----------------------------------------

enum class SplitterKind { Fixed, Vad, Feedback };

struct VadParams {
  int frame_ms = 10;
  int hangover_frames = 30;
  double energy_threshold = 0.0;  // 0 = calibrate from the clip head
};

struct SplitterConfig {
  SplitterKind kind = SplitterKind::Fixed;
  double interval_s = 2.0;
  double feedback_window_s = 4.0;
  VadParams vad;
};

// Parses "fixed:2", "fixed:3.0", "vad", "feedback" or "feedback:2:4".
SplitterConfig parse_splitter_spec(const std::string& spec);

}  // namespace rtstt

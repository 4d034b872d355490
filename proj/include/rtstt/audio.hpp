#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rtstt {

inline constexpr int kSampleRateHz = 16000;
inline constexpr int kBitsPerSample = 16;
inline constexpr int kChannels = 1;

// Mono 16 kHz signed 16-bit PCM. The only format the pipeline accepts.
struct AudioClip {
  std::vector<int16_t> samples;
  int sample_rate_hz = kSampleRateHz;
  int channels = kChannels;

  double duration_s() const {
    return static_cast<double>(samples.size()) / kSampleRateHz;
  }
};

// A contiguous span of samples released by a splitter for transcription.
// emit_ts_ms is stamped by the stream driver at release time and must not
// precede the stream time of the last contained sample.
struct AudioFragment {
  std::vector<int16_t> samples;
  uint32_t seq = 0;
  double capture_start_s = 0.0;
  int64_t emit_ts_ms = 0;

  double duration_s() const {
    return static_cast<double>(samples.size()) / kSampleRateHz;
  }
  double capture_end_s() const { return capture_start_s + duration_s(); }
};

struct WordTiming {
  std::string word;
  double start_s = 0.0;
  double end_s = 0.0;
  int segment_id = 0;
};

// Ground-truth words with start/end times. Entries are sorted by start_s,
// start < end for every entry, and entries within a segment do not overlap.
struct Timeline {
  std::vector<WordTiming> entries;
};

// Throws InvalidTimelineError if the ordering/overlap invariants are broken.
void validate_timeline(const Timeline& timeline);

// File duration from raw PCM byte count: T(s) = bytes * 8 / 16000 / 16.
// byte_size must cover whole 16-bit samples (even).
double duration_from_size(uint64_t byte_size);

AudioClip wav_read(const std::string& path);
void wav_write(const AudioClip& clip, const std::string& path);

struct GapProfile {
  int amplitude = 8000;
  int noise_floor = 50;
};

// Test-oracle audio: each word span is a 440 Hz tone burst at `amplitude`,
// gaps are uniform noise at `noise_floor`. Deterministic for a given input.
AudioClip synth_corpus(const Timeline& timeline, const GapProfile& profile);

// Timeline TSV: segment_id<TAB>start_s<TAB>end_s<TAB>word per line.
Timeline timeline_read(const std::string& path);
void timeline_write(const Timeline& timeline, const std::string& path);

double rms(std::span<const int16_t> samples);

}  // namespace rtstt

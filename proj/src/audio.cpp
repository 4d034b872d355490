#include "rtstt/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "rtstt/errors.hpp"

namespace rtstt {

namespace {

void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16le(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

uint32_t get_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t get_u16le(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

}  // namespace

void validate_timeline(const Timeline& timeline) {
  const auto& e = timeline.entries;
  for (size_t i = 0; i < e.size(); ++i) {
    if (!(e[i].start_s < e[i].end_s)) {
      throw InvalidTimelineError("timeline entry " + std::to_string(i) +
                                 " has start_s >= end_s");
    }
    if (i > 0 && e[i].start_s < e[i - 1].start_s) {
      throw InvalidTimelineError("timeline entries not sorted by start_s at " +
                                 std::to_string(i));
    }
    if (i > 0 && e[i].segment_id == e[i - 1].segment_id &&
        e[i].start_s < e[i - 1].end_s) {
      throw InvalidTimelineError("overlapping words in segment " +
                                 std::to_string(e[i].segment_id));
    }
  }
}

double duration_from_size(uint64_t byte_size) {
  if (byte_size % 2 != 0) {
    throw MalformedAudioError("byte size " + std::to_string(byte_size) +
                              " is not a whole number of 16-bit samples");
  }
  return static_cast<double>(byte_size) * 8.0 / 16000.0 / 16.0;
}

AudioClip wav_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedAudioError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 44) {
    throw MalformedAudioError(path + ": shorter than a WAV header");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    throw MalformedAudioError(path + ": missing RIFF/WAVE magic");
  }
  if (bytes.compare(12, 4, "fmt ") != 0) {
    throw MalformedAudioError(path + ": expected fmt chunk at offset 12");
  }
  if (get_u32le(p + 16) != 16) {
    throw UnsupportedFormatError(path + ": fmt chunk size " +
                                 std::to_string(get_u32le(p + 16)) +
                                 ", expected 16 (canonical PCM)");
  }
  if (uint16_t fmt = get_u16le(p + 20); fmt != 1) {
    throw UnsupportedFormatError(path + ": format code " +
                                 std::to_string(fmt) + ", expected 1 (PCM)");
  }
  if (uint16_t ch = get_u16le(p + 22); ch != kChannels) {
    throw UnsupportedFormatError(path + ": channel count " +
                                 std::to_string(ch) + ", expected 1");
  }
  if (uint32_t rate = get_u32le(p + 24); rate != kSampleRateHz) {
    throw UnsupportedFormatError(path + ": sample rate " +
                                 std::to_string(rate) + ", expected 16000");
  }
  if (uint16_t bits = get_u16le(p + 34); bits != kBitsPerSample) {
    throw UnsupportedFormatError(path + ": bit depth " +
                                 std::to_string(bits) + ", expected 16");
  }
  if (bytes.compare(36, 4, "data") != 0) {
    throw MalformedAudioError(path + ": expected data chunk at offset 36");
  }
  uint32_t data_size = get_u32le(p + 40);
  if (data_size % 2 != 0) {
    throw MalformedAudioError(path + ": odd data chunk size");
  }
  if (44 + static_cast<size_t>(data_size) > bytes.size()) {
    throw MalformedAudioError(path + ": data chunk truncated");
  }
  AudioClip clip;
  clip.samples.resize(data_size / 2);
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] =
        static_cast<int16_t>(get_u16le(p + 44 + 2 * i));
  }
  return clip;
}

void wav_write(const AudioClip& clip, const std::string& path) {
  if (clip.sample_rate_hz != kSampleRateHz || clip.channels != kChannels) {
    throw UnsupportedFormatError("clip is not mono 16 kHz");
  }
  const uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32le(out, 36 + data_size);
  out += "WAVE";
  out += "fmt ";
  put_u32le(out, 16);
  put_u16le(out, 1);  // PCM
  put_u16le(out, kChannels);
  put_u32le(out, kSampleRateHz);
  put_u32le(out, kSampleRateHz * kChannels * kBitsPerSample / 8);
  put_u16le(out, kChannels * kBitsPerSample / 8);
  put_u16le(out, kBitsPerSample);
  out += "data";
  put_u32le(out, data_size);
  for (int16_t s : clip.samples) {
    out.push_back(static_cast<char>(s & 0xff));
    out.push_back(static_cast<char>((s >> 8) & 0xff));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("write failed: " + path);
}

AudioClip synth_corpus(const Timeline& timeline, const GapProfile& profile) {
  validate_timeline(timeline);
  if (!(profile.amplitude > profile.noise_floor) || profile.noise_floor < 0) {
    throw Error("gap profile requires amplitude > noise_floor >= 0");
  }
  // Words may not overlap across segments either; spans are filled in place.
  for (size_t i = 1; i < timeline.entries.size(); ++i) {
    if (timeline.entries[i].start_s < timeline.entries[i - 1].end_s) {
      throw InvalidTimelineError("overlapping words at entry " +
                                 std::to_string(i));
    }
  }

  AudioClip clip;
  if (timeline.entries.empty()) return clip;

  double last_end = 0.0;
  for (const auto& w : timeline.entries) last_end = std::max(last_end, w.end_s);
  const auto n = static_cast<size_t>(
      std::ceil(last_end * kSampleRateHz - 1e-9));

  // Gaps first: uniform noise from a fixed seed keeps output reproducible.
  clip.samples.resize(n, 0);
  if (profile.noise_floor > 0) {
    std::mt19937 rng(0x5eedu);
    std::uniform_int_distribution<int> noise(-profile.noise_floor,
                                             profile.noise_floor);
    for (auto& s : clip.samples) s = static_cast<int16_t>(noise(rng));
  }

  constexpr double kToneHz = 440.0;
  for (const auto& w : timeline.entries) {
    const auto begin = static_cast<size_t>(std::llround(w.start_s * kSampleRateHz));
    const auto end = std::min(
        n, static_cast<size_t>(std::llround(w.end_s * kSampleRateHz)));
    for (size_t i = begin; i < end; ++i) {
      const double t = static_cast<double>(i) / kSampleRateHz;
      clip.samples[i] = static_cast<int16_t>(std::lround(
          profile.amplitude * std::sin(2.0 * std::numbers::pi * kToneHz * t)));
    }
  }
  return clip;
}

Timeline timeline_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  Timeline t;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    WordTiming w;
    std::string word;
    if (!(ss >> w.segment_id >> w.start_s >> w.end_s >> word)) {
      throw InvalidTimelineError(path + ":" + std::to_string(lineno) +
                                 ": expected segment_id, start, end, word");
    }
    w.word = word;
    t.entries.push_back(std::move(w));
  }
  validate_timeline(t);
  return t;
}

void timeline_write(const Timeline& timeline, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  char buf[64];
  for (const auto& w : timeline.entries) {
    std::snprintf(buf, sizeof buf, "%d\t%.6f\t%.6f\t", w.segment_id, w.start_s,
                  w.end_s);
    out << buf << w.word << '\n';
  }
}

double rms(std::span<const int16_t> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (int16_t s : samples) acc += static_cast<double>(s) * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace rtstt

#include "rtstt/splitter.hpp"

#include <algorithm>
#include <cmath>

#include "rtstt/errors.hpp"

namespace rtstt {

size_t FixedSplitterState::max_samples() const {
  auto n = std::llround(interval_s * kSampleRateHz);
  if (n < 1) throw ConfigError("fixed interval too small");
  return static_cast<size_t>(n);
}

std::vector<AudioFragment> fixed_push(FixedSplitterState& state,
                                      std::span<const int16_t> samples) {
  state.buffer.insert(state.buffer.end(), samples.begin(), samples.end());
  const size_t max = state.max_samples();
  std::vector<AudioFragment> out;
  while (state.buffer.size() >= max) {
    AudioFragment frag;
    frag.samples.assign(state.buffer.begin(), state.buffer.begin() + max);
    state.buffer.erase(state.buffer.begin(), state.buffer.begin() + max);
    frag.seq = state.next_seq++;
    frag.capture_start_s =
        static_cast<double>(state.consumed_samples) / kSampleRateHz;
    state.consumed_samples += static_cast<int64_t>(max);
    out.push_back(std::move(frag));
  }
  return out;
}

std::optional<AudioFragment> fixed_flush(FixedSplitterState& state) {
  if (state.buffer.empty()) return std::nullopt;
  AudioFragment frag;
  frag.samples = std::move(state.buffer);
  state.buffer.clear();
  frag.seq = state.next_seq++;
  frag.capture_start_s =
      static_cast<double>(state.consumed_samples) / kSampleRateHz;
  state.consumed_samples += static_cast<int64_t>(frag.samples.size());
  return frag;
}

size_t VadState::frame_samples() const {
  auto n = frame_ms * kSampleRateHz / 1000;
  if (n < 1) throw ConfigError("VAD frame too small");
  return static_cast<size_t>(n);
}

namespace {

// Emits the first `count` buffered samples as one fragment.
AudioFragment drain_vad_buffer(VadState& state, size_t count) {
  AudioFragment frag;
  frag.samples.assign(state.buffer.begin(),
                      state.buffer.begin() + static_cast<ptrdiff_t>(count));
  state.buffer.erase(state.buffer.begin(),
                     state.buffer.begin() + static_cast<ptrdiff_t>(count));
  frag.seq = state.next_seq++;
  frag.capture_start_s =
      static_cast<double>(state.buffer_start_sample) / kSampleRateHz;
  state.buffer_start_sample += static_cast<int64_t>(count);
  state.frame_cursor -= std::min(state.frame_cursor, count);
  return frag;
}

}  // namespace

std::vector<AudioFragment> vad_push(VadState& state,
                                    std::span<const int16_t> samples) {
  state.buffer.insert(state.buffer.end(), samples.begin(), samples.end());
  const size_t frame = state.frame_samples();
  std::vector<AudioFragment> out;
  while (state.frame_cursor + frame <= state.buffer.size()) {
    const double energy = rms(
        std::span<const int16_t>(state.buffer).subspan(state.frame_cursor, frame));
    state.frame_cursor += frame;
    const bool voiced = energy > state.energy_threshold;
    const bool opposes = (state.mode == VadMode::Silence) ? voiced : !voiced;
    state.opposing_run = opposes ? state.opposing_run + 1 : 0;
    if (state.opposing_run >= state.hangover_frames) {
      state.opposing_run = 0;
      if (state.mode == VadMode::Voice) {
        state.mode = VadMode::Silence;
        // Release only the scored prefix; unscored samples stay buffered.
        out.push_back(drain_vad_buffer(state, state.frame_cursor));
      } else {
        state.mode = VadMode::Voice;
      }
    }
  }
  return out;
}

std::optional<AudioFragment> vad_flush(VadState& state) {
  if (state.buffer.empty()) return std::nullopt;
  state.mode = VadMode::Silence;
  state.opposing_run = 0;
  return drain_vad_buffer(state, state.buffer.size());
}

double vad_calibrate_threshold(std::span<const int16_t> leading_samples) {
  const size_t head = std::min(leading_samples.size(),
                               static_cast<size_t>(kSampleRateHz / 10));
  return 4.0 * rms(leading_samples.subspan(0, head));
}

AudioFragment feedback_window(std::span<const int16_t> previous,
                              const AudioFragment& fragment,
                              const FeedbackSplitterConfig& cfg) {
  if (cfg.feedback_window_s < cfg.interval_s) {
    throw ConfigError("feedback window shorter than the split interval");
  }
  const auto max_samples =
      static_cast<size_t>(std::llround(cfg.feedback_window_s * kSampleRateHz));
  AudioFragment win;
  win.seq = fragment.seq;
  win.emit_ts_ms = fragment.emit_ts_ms;
  const size_t need_before =
      max_samples > fragment.samples.size()
          ? std::min(previous.size(), max_samples - fragment.samples.size())
          : 0;
  const auto tail = previous.subspan(previous.size() - need_before);
  win.samples.reserve(need_before + fragment.samples.size());
  win.samples.insert(win.samples.end(), tail.begin(), tail.end());
  if (max_samples >= fragment.samples.size()) {
    win.samples.insert(win.samples.end(), fragment.samples.begin(),
                       fragment.samples.end());
  } else {
    win.samples.insert(win.samples.end(),
                       fragment.samples.end() - max_samples,
                       fragment.samples.end());
  }
  win.capture_start_s =
      fragment.capture_end_s() -
      static_cast<double>(win.samples.size()) / kSampleRateHz;
  return win;
}

FeedbackSplitter::FeedbackSplitter(const FeedbackSplitterConfig& cfg)
    : cfg_(cfg) {
  if (cfg.feedback_window_s < cfg.interval_s) {
    throw ConfigError("feedback window shorter than the split interval");
  }
  fixed_.interval_s = cfg.interval_s;
}

AudioFragment FeedbackSplitter::window_for(const AudioFragment& fragment) {
  AudioFragment win = feedback_window(history_, fragment, cfg_);
  history_.insert(history_.end(), fragment.samples.begin(),
                  fragment.samples.end());
  const auto keep =
      static_cast<size_t>(std::llround(cfg_.feedback_window_s * kSampleRateHz));
  if (history_.size() > keep) {
    history_.erase(history_.begin(),
                   history_.end() - static_cast<ptrdiff_t>(keep));
  }
  return win;
}

std::vector<AudioFragment> FeedbackSplitter::push(
    std::span<const int16_t> samples) {
  std::vector<AudioFragment> out;
  for (auto& frag : fixed_push(fixed_, samples)) {
    out.push_back(window_for(frag));
  }
  return out;
}

std::optional<AudioFragment> FeedbackSplitter::flush() {
  auto frag = fixed_flush(fixed_);
  if (!frag) return std::nullopt;
  return window_for(*frag);
}

SplitterConfig parse_splitter_spec(const std::string& spec) {
  SplitterConfig cfg;
  std::vector<std::string> parts;
  size_t pos = 0;
  while (pos <= spec.size()) {
    size_t colon = spec.find(':', pos);
    if (colon == std::string::npos) colon = spec.size();
    parts.push_back(spec.substr(pos, colon - pos));
    pos = colon + 1;
  }
  const std::string& kind = parts[0];
  try {
    if (kind == "fixed") {
      cfg.kind = SplitterKind::Fixed;
      if (parts.size() > 1) cfg.interval_s = std::stod(parts[1]);
    } else if (kind == "vad") {
      cfg.kind = SplitterKind::Vad;
    } else if (kind == "feedback") {
      cfg.kind = SplitterKind::Feedback;
      if (parts.size() > 1) cfg.interval_s = std::stod(parts[1]);
      if (parts.size() > 2) cfg.feedback_window_s = std::stod(parts[2]);
    } else {
      throw ConfigError("unknown splitter '" + spec + "'");
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad splitter spec '" + spec + "'");
  }
  if (cfg.interval_s <= 0 || cfg.feedback_window_s < cfg.interval_s) {
    throw ConfigError("bad splitter parameters in '" + spec + "'");
  }
  return cfg;
}

}  // namespace rtstt

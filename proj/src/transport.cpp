#include "rtstt/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstring>
#include <deque>
#include <mutex>

#include <json.hpp>

#include "rtstt/errors.hpp"

namespace rtstt {

namespace {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

bool valid_kind(std::uint8_t k) { return k >= 0x01 && k <= 0x04; }

std::int64_t wall_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

bool send_all(int fd, std::span<const std::uint8_t> data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

void sleep_scaled_ms(double ms, double time_scale) {
  if (ms <= 0.0) return;
  std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms / time_scale));
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  if (frame.payload.size() > kMaxFramePayload) {
    throw ProtocolError("frame payload exceeds 16 MiB limit");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderBytes + frame.payload.size());
  out.push_back(static_cast<std::uint8_t>(frame.kind));
  put_u32le(out, frame.seq);
  put_u32le(out, static_cast<std::uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

std::optional<DecodedFrame> decode_frame(std::span<const std::uint8_t> buffer) {
  if (buffer.size() < kFrameHeaderBytes) return std::nullopt;
  const std::uint8_t kind = buffer[0];
  if (!valid_kind(kind)) {
    throw ProtocolError("unknown frame kind 0x" + [kind] {
      char hex[3];
      std::snprintf(hex, sizeof hex, "%02X", static_cast<unsigned>(kind));
      return std::string(hex);
    }());
  }
  const std::uint32_t len = get_u32le(buffer.data() + 5);
  if (len > kMaxFramePayload) {
    throw ProtocolError("frame payload length " + std::to_string(len) +
                        " exceeds 16 MiB limit");
  }
  if (buffer.size() < kFrameHeaderBytes + len) return std::nullopt;
  DecodedFrame out;
  out.frame.kind = static_cast<FrameKind>(kind);
  out.frame.seq = get_u32le(buffer.data() + 1);
  out.frame.payload.assign(buffer.begin() + kFrameHeaderBytes,
                           buffer.begin() + kFrameHeaderBytes + len);
  out.consumed = kFrameHeaderBytes + len;
  return out;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Frame> FrameDecoder::next() {
  const auto decoded =
      decode_frame(std::span<const std::uint8_t>(buffer_).subspan(offset_));
  if (!decoded) return std::nullopt;
  offset_ += decoded->consumed;
  if (offset_ > (1u << 16)) {  // compact once the dead prefix grows
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(offset_));
    offset_ = 0;
  }
  return decoded->frame;
}

std::vector<std::uint8_t> encode_transcript_payload(const TranscriptPayload& p) {
  nlohmann::json j;
  j["seq"] = p.seq;
  j["text"] = p.text;
  j["server_ts_ms"] = p.server_ts_ms;
  if (!p.error.empty()) j["error"] = p.error;
  const std::string s = j.dump();
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

TranscriptPayload parse_transcript_payload(std::span<const std::uint8_t> bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("transcript payload is not valid JSON: ") + e.what());
  }
  TranscriptPayload p;
  try {
    p.seq = j.at("seq").get<std::uint32_t>();
    p.text = j.at("text").get<std::string>();
    p.server_ts_ms = j.at("server_ts_ms").get<std::int64_t>();
    if (j.contains("error")) p.error = j["error"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("transcript payload missing field: ") + e.what());
  }
  return p;
}

std::vector<std::uint8_t> samples_to_bytes(std::span<const std::int16_t> samples) {
  std::vector<std::uint8_t> out;
  out.reserve(samples.size() * 2);
  for (std::int16_t s : samples) {
    const auto u = static_cast<std::uint16_t>(s);
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return out;
}

std::vector<std::int16_t> bytes_to_samples(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 2 != 0) {
    throw ProtocolError("audio payload has an odd byte count");
  }
  std::vector<std::int16_t> out;
  out.reserve(bytes.size() / 2);
  for (std::size_t i = 0; i < bytes.size(); i += 2) {
    const auto u =
        static_cast<std::uint16_t>(bytes[i] | (static_cast<std::uint16_t>(bytes[i + 1]) << 8));
    out.push_back(static_cast<std::int16_t>(u));
  }
  return out;
}

HostPort parse_host_port(const std::string& spec) {
  const std::size_t colon = spec.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= spec.size()) {
    throw ConfigError("expected host:port, got '" + spec + "'");
  }
  HostPort hp;
  hp.host = spec.substr(0, colon);
  const std::string port_str = spec.substr(colon + 1);
  int port = 0;
  try {
    std::size_t pos = 0;
    port = std::stoi(port_str, &pos);
    if (pos != port_str.size()) throw std::invalid_argument("trailing junk");
  } catch (const std::exception&) {
    throw ConfigError("invalid port '" + port_str + "' in '" + spec + "'");
  }
  if (port < 0 || port > 65535) {
    throw ConfigError("port " + std::to_string(port) + " out of range");
  }
  hp.port = static_cast<std::uint16_t>(port);
  return hp;
}

// --- Server -----------------------------------------------------------------

namespace {

int open_listener(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw ConnectionError("cannot resolve bind address " + host);
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 16) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw ConnectionError("cannot bind " + host + ":" + service + ": " +
                          std::strerror(errno));
  }
  return fd;
}

std::uint16_t bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw ConnectionError("getsockname failed");
  }
  return ntohs(addr.sin_port);
}

}  // namespace

Server::Server(ServerConfig cfg, TranscriberFactory factory)
    : cfg_(std::move(cfg)), factory_(std::move(factory)) {
  listen_fd_ = open_listener(cfg_.host, cfg_.port);
  port_ = bound_port(listen_fd_);
  accept_thread_ = std::thread(&Server::accept_loop, this);
}

Server::~Server() { stop(); }

void Server::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard<std::mutex> lock(conn_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    threads.swap(conn_threads_);
  }
  for (std::thread& t : threads) {
    if (t.joinable()) t.join();
  }
}

void Server::accept_loop() {
  while (!stopping_.load()) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listener closed
    }
    std::lock_guard<std::mutex> lock(conn_mu_);
    if (stopping_.load()) {
      ::close(fd);
      break;
    }
    conn_fds_.push_back(fd);
    conn_threads_.emplace_back(&Server::handle_connection, this, fd);
  }
}

void Server::handle_connection(int fd) {
  std::unique_ptr<Transcriber> transcriber;
  try {
    transcriber = factory_();
  } catch (const std::exception&) {
    ::close(fd);
    return;
  }

  struct Work {
    AudioFragment fragment;
  };
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Work> queue;
  bool input_done = false;
  double time_scale = cfg_.time_scale;
  LatencyModel latency = cfg_.latency;

  std::thread worker([&] {
    for (;;) {
      Work item;
      double scale;
      LatencyModel model;
      {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return input_done || !queue.empty(); });
        if (queue.empty()) return;  // input_done and drained
        item = std::move(queue.front());
        queue.pop_front();
        scale = time_scale;
        model = latency;
      }
      TranscriptPayload payload;
      payload.seq = item.fragment.seq;
      try {
        payload.text = transcriber->transcribe(item.fragment);
      } catch (const std::exception& e) {
        payload.error = e.what();
      }
      sleep_scaled_ms(apply_latency(model, item.fragment.duration_s()), scale);
      payload.server_ts_ms = wall_clock_ms();
      Frame frame;
      frame.kind = FrameKind::Transcript;
      frame.seq = payload.seq;
      frame.payload = encode_transcript_payload(payload);
      if (!send_all(fd, encode_frame(frame))) return;  // peer went away
    }
  });

  FrameDecoder decoder;
  std::vector<std::uint8_t> rx(64 * 1024);
  std::int64_t stream_samples = 0;           // contiguous-stream fallback position
  std::optional<double> next_capture_start;  // explicit position from Config
  bool reading = true;
  while (reading) {
    const ssize_t n = ::recv(fd, rx.data(), rx.size(), 0);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      break;  // drop or clean close without End: stop feeding, drain below
    }
    try {
      decoder.feed(std::span<const std::uint8_t>(rx.data(), static_cast<std::size_t>(n)));
      while (auto frame = decoder.next()) {
        switch (frame->kind) {
          case FrameKind::Audio: {
            AudioFragment frag;
            frag.samples = bytes_to_samples(frame->payload);
            frag.seq = frame->seq;
            if (next_capture_start) {
              frag.capture_start_s = *next_capture_start;
              stream_samples = std::llround(*next_capture_start * kSampleRateHz) +
                               static_cast<std::int64_t>(frag.samples.size());
              next_capture_start.reset();
            } else {
              frag.capture_start_s =
                  static_cast<double>(stream_samples) / kSampleRateHz;
              stream_samples += static_cast<std::int64_t>(frag.samples.size());
            }
            {
              std::lock_guard<std::mutex> lock(mu);
              queue.push_back(Work{std::move(frag)});
            }
            cv.notify_one();
            break;
          }
          case FrameKind::Config: {
            try {
              const auto j = nlohmann::json::parse(frame->payload.begin(),
                                                   frame->payload.end());
              std::lock_guard<std::mutex> lock(mu);
              if (j.contains("time_scale")) time_scale = j["time_scale"].get<double>();
              if (j.contains("latency_intercept_ms")) {
                latency.intercept_ms = j["latency_intercept_ms"].get<double>();
              }
              if (j.contains("latency_slope_ms_per_s")) {
                latency.slope_ms_per_s = j["latency_slope_ms_per_s"].get<double>();
              }
              if (j.contains("next_capture_start_s")) {
                next_capture_start = j["next_capture_start_s"].get<double>();
              }
            } catch (const nlohmann::json::exception&) {
              throw ProtocolError("config payload is not valid JSON");
            }
            break;
          }
          case FrameKind::End:
            reading = false;
            break;
          case FrameKind::Transcript:
            throw ProtocolError("client sent a transcript frame");
        }
        if (!reading) break;
      }
    } catch (const ProtocolError&) {
      break;  // poisoned stream: discard this connection
    }
  }
  {
    std::lock_guard<std::mutex> lock(mu);
    input_done = true;
  }
  cv.notify_one();
  worker.join();
  {
    std::lock_guard<std::mutex> lock(conn_mu_);
    conn_fds_.erase(std::remove(conn_fds_.begin(), conn_fds_.end(), fd), conn_fds_.end());
  }
  ::close(fd);
}

// --- Stream drivers ---------------------------------------------------------

namespace {

constexpr std::size_t kChunkSamples = 1600;  // 100 ms of stream time

// One handle over the three splitter flavors.
struct SplitterRuntime {
  SplitterConfig cfg;
  FixedSplitterState fixed;
  VadState vad;
  std::optional<FeedbackSplitter> feedback;

  explicit SplitterRuntime(const SplitterConfig& c, std::span<const int16_t> clip_head)
      : cfg(c) {
    switch (cfg.kind) {
      case SplitterKind::Fixed:
        fixed.interval_s = cfg.interval_s;
        break;
      case SplitterKind::Vad:
        vad.frame_ms = cfg.vad.frame_ms;
        vad.hangover_frames = cfg.vad.hangover_frames;
        vad.energy_threshold = cfg.vad.energy_threshold > 0.0
                                   ? cfg.vad.energy_threshold
                                   : vad_calibrate_threshold(clip_head);
        break;
      case SplitterKind::Feedback:
        feedback.emplace(FeedbackSplitterConfig{cfg.interval_s, cfg.feedback_window_s});
        break;
    }
  }

  std::vector<AudioFragment> push(std::span<const int16_t> samples) {
    switch (cfg.kind) {
      case SplitterKind::Fixed:
        return fixed_push(fixed, samples);
      case SplitterKind::Vad:
        return vad_push(vad, samples);
      case SplitterKind::Feedback:
        return feedback->push(samples);
    }
    return {};
  }

  std::vector<AudioFragment> flush() {
    std::optional<AudioFragment> frag;
    switch (cfg.kind) {
      case SplitterKind::Fixed:
        frag = fixed_flush(fixed);
        break;
      case SplitterKind::Vad:
        frag = vad_flush(vad);
        break;
      case SplitterKind::Feedback:
        frag = feedback->flush();
        break;
    }
    std::vector<AudioFragment> out;
    if (frag) out.push_back(std::move(*frag));
    return out;
  }
};

// Shared tail of both drivers: silence-artifact dedup, merge or append,
// measured-token assignment, rendering.
void assemble_result(StreamResult& result, std::vector<TranscriptEvent> raw,
                     bool feedback_mode, const MergeParams& merge_params) {
  result.events = dedup_repetition_artifact(raw);
  result.transcript.params = merge_params;
  for (TranscriptEvent& ev : result.events) {
    if (ev.error) {
      ev.measured_tokens.clear();
      continue;
    }
    const std::vector<std::string> tokens = tokenize(ev.text);
    if (feedback_mode) {
      const MergeResult merged =
          merge_transcription(result.transcript, tokens, ev.arrival_ts_ms);
      ev.measured_tokens = merged.net_new;
    } else {
      for (const std::string& tok : tokens) {
        result.transcript.words.push_back(
            TranscriptWord{tok, ev.arrival_ts_ms, Provenance::Stable});
      }
      ev.measured_tokens = tokens;
    }
  }
  result.final_text = render_transcript(result.transcript);
}

int connect_to(const HostPort& server) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_NUMERICSERV;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(server.port);
  if (::getaddrinfo(server.host.c_str(), service.c_str(), &hints, &res) != 0 ||
      res == nullptr) {
    throw ConnectionError("cannot resolve server address " + server.host);
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw ConnectionError("cannot connect to " + server.host + ":" + service + ": " +
                          std::strerror(errno));
  }
  return fd;
}

}  // namespace

StreamResult client_stream(const AudioClip& clip, const SplitterConfig& splitter_cfg,
                           const MergeParams& merge_params, const HostPort& server,
                           double time_scale) {
  if (time_scale <= 0.0) throw ConfigError("time_scale must be > 0");
  const int fd = connect_to(server);

  StreamResult result;
  struct Arrival {
    TranscriptPayload payload;
    std::int64_t arrival_ts_ms;
  };
  std::vector<Arrival> arrivals;
  std::mutex arrivals_mu;
  std::atomic<bool> receiver_failed{false};

  const auto t0 = std::chrono::steady_clock::now();
  auto stream_now_ms = [&] {
    const double real_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
    return static_cast<std::int64_t>(std::llround(real_ms * time_scale));
  };

  std::thread receiver([&] {
    FrameDecoder decoder;
    std::vector<std::uint8_t> rx(64 * 1024);
    try {
      for (;;) {
        const ssize_t n = ::recv(fd, rx.data(), rx.size(), 0);
        if (n == 0) return;  // server drained the queue and closed
        if (n < 0) {
          if (errno == EINTR) continue;
          receiver_failed.store(true);
          return;
        }
        decoder.feed(std::span<const std::uint8_t>(rx.data(), static_cast<std::size_t>(n)));
        while (auto frame = decoder.next()) {
          if (frame->kind != FrameKind::Transcript) continue;
          Arrival a{parse_transcript_payload(frame->payload), stream_now_ms()};
          std::lock_guard<std::mutex> lock(arrivals_mu);
          arrivals.push_back(std::move(a));
        }
      }
    } catch (const std::exception&) {
      receiver_failed.store(true);
    }
  });

  std::size_t frames_sent = 0;
  bool send_failed = false;
  auto ship_fragment = [&](const AudioFragment& frag) {
    if (send_failed) return;
    nlohmann::json cfg_json;
    cfg_json["next_capture_start_s"] = frag.capture_start_s;
    const std::string cfg_text = cfg_json.dump();
    Frame cfg_frame;
    cfg_frame.kind = FrameKind::Config;
    cfg_frame.seq = frag.seq;
    cfg_frame.payload.assign(cfg_text.begin(), cfg_text.end());
    Frame audio;
    audio.kind = FrameKind::Audio;
    audio.seq = frag.seq;
    audio.payload = samples_to_bytes(frag.samples);
    if (!send_all(fd, encode_frame(cfg_frame)) || !send_all(fd, encode_frame(audio))) {
      send_failed = true;
      return;
    }
    ++frames_sent;
  };

  {
    nlohmann::json hello;
    hello["time_scale"] = time_scale;
    const std::string text = hello.dump();
    Frame f;
    f.kind = FrameKind::Config;
    f.payload.assign(text.begin(), text.end());
    send_failed = !send_all(fd, encode_frame(f));
  }

  SplitterRuntime splitter(
      splitter_cfg,
      std::span<const int16_t>(clip.samples.data(),
                               std::min(clip.samples.size(), kChunkSamples)));
  for (std::size_t off = 0; off < clip.samples.size() && !send_failed;
       off += kChunkSamples) {
    const std::size_t len = std::min(kChunkSamples, clip.samples.size() - off);
    const auto fragments =
        splitter.push(std::span<const int16_t>(clip.samples.data() + off, len));
    for (const AudioFragment& frag : fragments) ship_fragment(frag);
    sleep_scaled_ms(static_cast<double>(len) * 1000.0 / kSampleRateHz, time_scale);
  }
  for (const AudioFragment& frag : splitter.flush()) ship_fragment(frag);
  if (!send_failed) {
    Frame end;
    end.kind = FrameKind::End;
    send_failed = !send_all(fd, encode_frame(end));
  }
  ::shutdown(fd, SHUT_WR);
  receiver.join();
  ::close(fd);

  std::vector<TranscriptEvent> raw;
  {
    std::lock_guard<std::mutex> lock(arrivals_mu);
    raw.reserve(arrivals.size());
    for (const Arrival& a : arrivals) {
      TranscriptEvent ev;
      ev.seq = a.payload.seq;
      ev.text = a.payload.text;
      ev.arrival_ts_ms = a.arrival_ts_ms;
      ev.error = !a.payload.error.empty();
      raw.push_back(std::move(ev));
    }
  }
  result.complete = !send_failed && !receiver_failed.load() && raw.size() == frames_sent;
  if (!result.complete) {
    result.error = send_failed      ? "send failed mid-stream"
                   : receiver_failed.load() ? "receive failed mid-stream"
                                            : "server returned fewer transcripts than fragments";
  }
  assemble_result(result, std::move(raw), splitter_cfg.kind == SplitterKind::Feedback,
                  merge_params);
  return result;
}

StreamResult run_stream_virtual(const AudioClip& clip, const SplitterConfig& splitter_cfg,
                                const MergeParams& merge_params,
                                const LatencyModel& latency, Transcriber& backend) {
  StreamResult result;
  std::vector<TranscriptEvent> raw;
  std::int64_t prev_completion_ms = 0;  // serial backend instance

  auto process = [&](AudioFragment frag, std::int64_t emit_ts_ms) {
    frag.emit_ts_ms = emit_ts_ms;
    TranscriptEvent ev;
    ev.seq = frag.seq;
    try {
      ev.text = backend.transcribe(frag);
    } catch (const std::exception&) {
      ev.error = true;
    }
    const double processing_ms = apply_latency(latency, frag.duration_s());
    const std::int64_t completion =
        std::max(emit_ts_ms, prev_completion_ms) + std::llround(processing_ms);
    prev_completion_ms = completion;
    ev.arrival_ts_ms = completion;  // zero transmission delay
    raw.push_back(std::move(ev));
  };

  SplitterRuntime splitter(
      splitter_cfg,
      std::span<const int16_t>(clip.samples.data(),
                               std::min(clip.samples.size(), kChunkSamples)));
  for (std::size_t off = 0; off < clip.samples.size(); off += kChunkSamples) {
    const std::size_t len = std::min(kChunkSamples, clip.samples.size() - off);
    const std::int64_t chunk_end_ms =
        std::llround(static_cast<double>(off + len) * 1000.0 / kSampleRateHz);
    for (AudioFragment& frag :
         splitter.push(std::span<const int16_t>(clip.samples.data() + off, len))) {
      process(std::move(frag), chunk_end_ms);
    }
  }
  const std::int64_t end_ms =
      std::llround(static_cast<double>(clip.samples.size()) * 1000.0 / kSampleRateHz);
  for (AudioFragment& frag : splitter.flush()) process(std::move(frag), end_ms);

  assemble_result(result, std::move(raw), splitter_cfg.kind == SplitterKind::Feedback,
                  merge_params);
  return result;
}

}  // namespace rtstt

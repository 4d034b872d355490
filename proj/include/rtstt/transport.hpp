#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rtstt/asr.hpp"
#include "rtstt/audio.hpp"
#include "rtstt/merge.hpp"
#include "rtstt/splitter.hpp"

namespace rtstt {

enum class FrameKind : std::uint8_t {
  Audio = 0x01,
  Transcript = 0x02,
  End = 0x03,
  Config = 0x04,
};

// Wire layout: 1-byte kind, u32le seq, u32le payload length, payload.
struct Frame {
  FrameKind kind = FrameKind::Audio;
  std::uint32_t seq = 0;
  std::vector<std::uint8_t> payload;

  bool operator==(const Frame&) const = default;
};

inline constexpr std::size_t kFrameHeaderBytes = 9;
inline constexpr std::size_t kMaxFramePayload = 16u * 1024u * 1024u;

std::vector<std::uint8_t> encode_frame(const Frame& frame);

struct DecodedFrame {
  Frame frame;
  std::size_t consumed = 0;
};

// nullopt means the buffer holds only part of a frame (need more bytes).
std::optional<DecodedFrame> decode_frame(std::span<const std::uint8_t> buffer);

// Incremental decoder over a byte stream.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Frame> next();

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
};

// Transcript frames carry this as UTF-8 JSON.
struct TranscriptPayload {
  std::uint32_t seq = 0;
  std::string text;
  std::int64_t server_ts_ms = 0;
  std::string error;  // nonempty when the backend failed on this fragment
};

std::vector<std::uint8_t> encode_transcript_payload(const TranscriptPayload& p);
TranscriptPayload parse_transcript_payload(std::span<const std::uint8_t> bytes);

// Audio sample <-> byte helpers (PCM16LE).
std::vector<std::uint8_t> samples_to_bytes(std::span<const std::int16_t> samples);
std::vector<std::int16_t> bytes_to_samples(std::span<const std::uint8_t> bytes);

struct ServerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
  LatencyModel latency{0.0, 0.0};
  double time_scale = 1.0;  // divides simulated processing sleeps
};

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

HostPort parse_host_port(const std::string& spec);

// Streaming ASR server. One transcriber instance and one serial worker per
// connection; audio frames are answered in order with Transcript frames.
class Server {
 public:
  Server(ServerConfig cfg, TranscriberFactory factory);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void stop();
  std::uint16_t port() const { return port_; }

 private:
  struct Connection;

  void accept_loop();
  void handle_connection(int fd);

  ServerConfig cfg_;
  TranscriberFactory factory_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex conn_mu_;
  std::vector<std::thread> conn_threads_;
  std::vector<int> conn_fds_;
};

// Everything a streaming run produces: raw (deduplicated) transcript events
// with arrival stamps in stream-time milliseconds (stream start = 0), the
// rolling transcript after merging, and its rendered text.
struct StreamResult {
  std::vector<TranscriptEvent> events;
  RollingTranscript transcript;
  std::string final_text;
  std::int64_t stream_start_ts_ms = 0;
  bool complete = true;
  std::string error;
};

// Drives a clip through a splitter against a live server, pacing 100 ms
// chunks of stream time (divided by time_scale on the wall clock).
StreamResult client_stream(const AudioClip& clip, const SplitterConfig& splitter_cfg,
                           const MergeParams& merge_params, const HostPort& server,
                           double time_scale);

// Same pipeline on a virtual clock: chunk pacing, serial per-stream ASR with
// the latency model, zero transmission delay. Deterministic run-to-run.
StreamResult run_stream_virtual(const AudioClip& clip, const SplitterConfig& splitter_cfg,
                                const MergeParams& merge_params,
                                const LatencyModel& latency, Transcriber& backend);

}  // namespace rtstt

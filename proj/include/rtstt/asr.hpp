#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtstt/audio.hpp"

namespace rtstt {

// Backend contract: one instance per connection/stream, every fragment of a
// stream goes through the same instance.
class Transcriber {
 public:
  virtual ~Transcriber() = default;
  virtual std::string transcribe(const AudioFragment& fragment) = 0;
};

using TranscriberFactory = std::function<std::unique_ptr<Transcriber>()>;

// Deterministic ground-truth-aligned transcription. A word fully inside the
// fragment is emitted verbatim. A word cut by a fragment boundary with
// overlap fraction f >= 0.5 degrades to a truncated token of round(f * len)
// characters taken from the covered side; below 0.5 it is dropped.
std::string mock_transcribe(const AudioFragment& fragment,
                            const Timeline& timeline);

class MockTranscriber : public Transcriber {
 public:
  explicit MockTranscriber(Timeline timeline) : timeline_(std::move(timeline)) {}
  std::string transcribe(const AudioFragment& fragment) override {
    return mock_transcribe(fragment, timeline_);
  }

 private:
  Timeline timeline_;
};

// Affine processing-delay model: D_p = intercept + slope * fragment duration.
struct LatencyModel {
  double intercept_ms = 0.0;
  double slope_ms_per_s = 0.0;
};

double apply_latency(const LatencyModel& model, double fragment_duration_s);

struct LatencyFit {
  LatencyModel model;
  double residual_ss = 0.0;
};

// Least-squares affine fit over (duration_s, delay_ms) points.
// Throws DegenerateFitError when all durations coincide.
LatencyFit fit_latency_model(
    std::span<const std::pair<double, double>> points);

// Measured processing delays for the two model classes shipped as presets.
std::span<const std::pair<double, double>> latency_points_tiny();
std::span<const std::pair<double, double>> latency_points_base();

// "tiny" or "base": the fit over the corresponding measurement points.
LatencyModel latency_preset(const std::string& name);

struct ExternalBackendConfig {
  std::string command;       // executable taking a WAV path, text on stdout
  int timeout_ms = 60000;
  std::string work_dir = "/tmp";
};

struct ExternalResult {
  std::string text;
  double wall_ms = 0.0;  // measured D_p
};

// Writes the fragment as a temp WAV and runs the adapter process.
ExternalResult external_transcribe(const AudioFragment& fragment,
                                   const ExternalBackendConfig& config);

class ExternalTranscriber : public Transcriber {
 public:
  explicit ExternalTranscriber(ExternalBackendConfig config)
      : config_(std::move(config)) {}
  std::string transcribe(const AudioFragment& fragment) override {
    return external_transcribe(fragment, config_).text;
  }

 private:
  ExternalBackendConfig config_;
};

}  // namespace rtstt

#include "rtstt/asr.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "rtstt/errors.hpp"

namespace rtstt {

std::string mock_transcribe(const AudioFragment& fragment,
                            const Timeline& timeline) {
  constexpr double kEps = 1e-9;
  const double frag_start = fragment.capture_start_s;
  const double frag_end = fragment.capture_end_s();
  std::string out;
  for (const auto& w : timeline.entries) {
    const double ov_start = std::max(w.start_s, frag_start);
    const double ov_end = std::min(w.end_s, frag_end);
    if (ov_end - ov_start <= kEps) continue;

    std::string token;
    if (w.start_s >= frag_start - kEps && w.end_s <= frag_end + kEps) {
      token = w.word;
    } else {
      const double f = (ov_end - ov_start) / (w.end_s - w.start_s);
      if (f < 0.5 - kEps) continue;
      const auto len = static_cast<double>(w.word.size());
      // Keep the covered side: chars proportional to the covered span.
      const auto first =
          static_cast<size_t>(std::llround((ov_start - w.start_s) /
                                           (w.end_s - w.start_s) * len));
      auto count = static_cast<size_t>(std::llround(f * len));
      count = std::min(count, w.word.size() - std::min(first, w.word.size()));
      token = w.word.substr(first, count);
      if (token.empty()) continue;
    }
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

double apply_latency(const LatencyModel& model, double fragment_duration_s) {
  return model.intercept_ms + model.slope_ms_per_s * fragment_duration_s;
}

LatencyFit fit_latency_model(
    std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) {
    throw DegenerateFitError("need at least two measurement points");
  }
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) {
    throw DegenerateFitError("all fragment durations are equal");
  }
  LatencyFit fit;
  fit.model.slope_ms_per_s = sxy / sxx;
  fit.model.intercept_ms = my - fit.model.slope_ms_per_s * mx;
  for (const auto& [x, y] : points) {
    const double r = y - apply_latency(fit.model, x);
    fit.residual_ss += r * r;
  }
  return fit;
}

namespace {
constexpr std::array<std::pair<double, double>, 4> kTinyPoints{
    {{2.0, 503.0}, {3.0, 517.0}, {5.0, 548.0}, {10.0, 608.0}}};
constexpr std::array<std::pair<double, double>, 4> kBasePoints{
    {{2.0, 1042.0}, {3.0, 1072.0}, {5.0, 1089.0}, {10.0, 1132.0}}};
}  // namespace

std::span<const std::pair<double, double>> latency_points_tiny() {
  return kTinyPoints;
}

std::span<const std::pair<double, double>> latency_points_base() {
  return kBasePoints;
}

LatencyModel latency_preset(const std::string& name) {
  if (name == "tiny") return fit_latency_model(latency_points_tiny()).model;
  if (name == "base") return fit_latency_model(latency_points_base()).model;
  throw ConfigError("unknown latency preset '" + name + "'");
}

namespace {

// fork/exec with stdout capture and a poll-based deadline.
std::string run_with_timeout(const std::string& command,
                             const std::string& arg, int timeout_ms) {
  int pipefd[2];
  if (pipe(pipefd) != 0) throw BackendUnavailableError("pipe() failed");
  const pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    throw BackendUnavailableError("fork() failed");
  }
  if (pid == 0) {
    dup2(pipefd[1], STDOUT_FILENO);
    close(pipefd[0]);
    close(pipefd[1]);
    execlp(command.c_str(), command.c_str(), arg.c_str(),
           static_cast<char*>(nullptr));
    _exit(127);
  }
  close(pipefd[1]);
  std::string output;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(timeout_ms);
  char buf[4096];
  bool timed_out = false;
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - std::chrono::steady_clock::now())
                          .count();
    if (left <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{pipefd[0], POLLIN, 0};
    const int pr = poll(&pfd, 1, static_cast<int>(left));
    if (pr <= 0) {
      if (pr == 0) timed_out = true;
      break;
    }
    const ssize_t r = read(pipefd[0], buf, sizeof buf);
    if (r <= 0) break;
    output.append(buf, static_cast<size_t>(r));
  }
  close(pipefd[0]);
  if (timed_out) {
    kill(pid, SIGKILL);
    waitpid(pid, nullptr, 0);
    throw BackendUnavailableError("backend '" + command + "' timed out");
  }
  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw BackendUnavailableError("backend '" + command + "' exited with " +
                                  std::to_string(WEXITSTATUS(status)));
  }
  return output;
}

}  // namespace

ExternalResult external_transcribe(const AudioFragment& fragment,
                                   const ExternalBackendConfig& config) {
  if (config.command.empty()) {
    throw BackendUnavailableError("no external command configured");
  }
  AudioClip clip;
  clip.samples = fragment.samples;
  const std::string wav_path =
      (std::filesystem::path(config.work_dir) /
       ("rtstt_frag_" + std::to_string(::getpid()) + "_" +
        std::to_string(fragment.seq) + ".wav"))
          .string();
  wav_write(clip, wav_path);
  ExternalResult result;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    result.text = run_with_timeout(config.command, wav_path, config.timeout_ms);
  } catch (...) {
    std::filesystem::remove(wav_path);
    throw;
  }
  result.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  std::filesystem::remove(wav_path);
  // Trim the trailing newline most CLI engines print.
  while (!result.text.empty() &&
         (result.text.back() == '\n' || result.text.back() == '\r')) {
    result.text.pop_back();
  }
  return result;
}

}  // namespace rtstt

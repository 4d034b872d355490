#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "rtstt/asr.hpp"
#include "rtstt/audio.hpp"
#include "rtstt/delay.hpp"
#include "rtstt/errors.hpp"
#include "rtstt/harness.hpp"
#include "rtstt/merge.hpp"
#include "rtstt/metrics.hpp"
#include "rtstt/splitter.hpp"
#include "rtstt/transport.hpp"

namespace {

using namespace rtstt;

struct SplitterOpts {
  std::string splitter = "fixed:2";
  double interval_s = 2.0;
  double feedback_window_s = 4.0;
  int vad_frame_ms = 10;
  int vad_hangover_frames = 30;
  double vad_threshold = 0.0;
};

void add_splitter_options(CLI::App* cmd, SplitterOpts& o) {
  cmd->add_option("--splitter", o.splitter,
                  "fixed[:interval], vad, or feedback[:interval[:window]]");
  cmd->add_option("--interval-s", o.interval_s, "fragment interval in seconds");
  cmd->add_option("--feedback-window-s", o.feedback_window_s,
                  "trailing context window in seconds");
  cmd->add_option("--vad-frame-ms", o.vad_frame_ms, "VAD scoring frame length");
  cmd->add_option("--vad-hangover-frames", o.vad_hangover_frames,
                  "consecutive opposing frames needed to flip state");
  cmd->add_option("--vad-threshold", o.vad_threshold,
                  "RMS energy threshold (0 = calibrate from the clip head)");
}

SplitterConfig resolve_splitter(const CLI::App* cmd, const SplitterOpts& o) {
  SplitterConfig cfg = parse_splitter_spec(o.splitter);
  if (cmd->count("--interval-s") > 0) cfg.interval_s = o.interval_s;
  if (cmd->count("--feedback-window-s") > 0) cfg.feedback_window_s = o.feedback_window_s;
  cfg.vad.frame_ms = o.vad_frame_ms;
  cfg.vad.hangover_frames = o.vad_hangover_frames;
  cfg.vad.energy_threshold = o.vad_threshold;
  return cfg;
}

struct LatencyOpts {
  std::string preset = "tiny";
  double intercept_ms = 0.0;
  double slope = 0.0;
};

void add_latency_options(CLI::App* cmd, LatencyOpts& o) {
  cmd->add_option("--latency-preset", o.preset, "processing delay preset: tiny or base");
  cmd->add_option("--latency-intercept-ms", o.intercept_ms,
                  "override the preset's fixed cost");
  cmd->add_option("--latency-slope", o.slope,
                  "override the preset's per-second cost (ms/s)");
}

LatencyModel resolve_latency(const CLI::App* cmd, const LatencyOpts& o) {
  LatencyModel model = latency_preset(o.preset);
  if (cmd->count("--latency-intercept-ms") > 0) model.intercept_ms = o.intercept_ms;
  if (cmd->count("--latency-slope") > 0) model.slope_ms_per_s = o.slope;
  return model;
}

struct BackendOpts {
  std::string backend = "mock";
  std::string external_cmd;
};

void add_backend_options(CLI::App* cmd, BackendOpts& o) {
  cmd->add_option("--backend", o.backend, "mock or external");
  cmd->add_option("--external-cmd", o.external_cmd,
                  "adapter executable: argv[1]=WAV path, transcript on stdout");
}

TranscriberFactory make_backend_factory(const BackendOpts& o, const Timeline& timeline) {
  if (o.backend == "mock") {
    return [timeline] { return std::make_unique<MockTranscriber>(timeline); };
  }
  if (o.backend == "external") {
    if (o.external_cmd.empty()) {
      throw ConfigError("--backend external requires --external-cmd");
    }
    ExternalBackendConfig cfg;
    cfg.command = o.external_cmd;
    return [cfg] { return std::make_unique<ExternalTranscriber>(cfg); };
  }
  throw ConfigError("unknown backend '" + o.backend + "'");
}

struct NormOpts {
  NormalizationConfig cfg;
};

// Config-file keys intentionally match the NormalizationConfig field names.
void add_norm_options(CLI::App* cmd, NormOpts& o) {
  cmd->add_flag("--tag_punctuation,!--no-tag_punctuation", o.cfg.tag_punctuation,
                "replace <PERIOD>-style tags with punctuation");
  cmd->add_flag("--strip_annotations,!--no-strip_annotations", o.cfg.strip_annotations,
                "drop bracketed music/silence annotations");
  cmd->add_flag("--numbers_to_words,!--no-numbers_to_words", o.cfg.numbers_to_words,
                "spell out integer numerals");
  cmd->add_flag("--expand_contractions,!--no-expand_contractions",
                o.cfg.expand_contractions, "expand common English contractions");
  cmd->add_flag("--url_textualize,!--no-url_textualize", o.cfg.url_textualize,
                "speak URL separators as words");
  cmd->add_flag("--strip_music_symbol,!--no-strip_music_symbol",
                o.cfg.strip_music_symbol, "drop the musical note symbol");
  cmd->add_flag("--collapse_whitespace,!--no-collapse_whitespace",
                o.cfg.collapse_whitespace, "squeeze whitespace runs");
  cmd->add_flag("--lowercase,!--no-lowercase", o.cfg.lowercase, "case-fold the text");
}

struct SearchOpts {
  SearchParams params;
};

void add_search_options(CLI::App* cmd, SearchOpts& o) {
  cmd->add_option("--search-width", o.params.search_width,
                  "initial delay-search window, in hypothesis segments");
  cmd->add_option("--widen-step", o.params.widen_step,
                  "window growth when a word is missed");
  cmd->add_option("--context-radius", o.params.context_radius,
                  "reference words required on each side of a match");
}

struct MergeOpts {
  MergeParams params;
};

void add_merge_options(CLI::App* cmd, MergeOpts& o) {
  cmd->add_option("--merge-nwords", o.params.n_words,
                  "transcript tail length searched for a merge match");
  cmd->add_option("--merge-words-checked", o.params.words_checked,
                  "consecutive words that must match to merge");
}

void print_metrics(const ErrorReport& report) {
  std::printf("wer=%.6f mer=%.6f wil=%.6f hits=%d substitutions=%d deletions=%d insertions=%d\n",
              report.wer, report.mer, report.wil, report.hits, report.substitutions,
              report.deletions, report.insertions);
}

void print_delay_summary(const DelaySummary& summary) {
  if (summary.mean_delay_ms) {
    std::printf("mean_delay_ms=%.3f", *summary.mean_delay_ms);
  } else {
    std::printf("mean_delay_ms=nan");
  }
  std::printf(" n_found=%d n_word_not_found=%d n_context_not_found=%d n_false_positives=%d\n",
              summary.n_found, summary.n_word_not_found, summary.n_context_not_found,
              summary.n_false_positive);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted.store(true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming transcription gateway and evaluation harness"};
  app.require_subcommand(1);

  // --- synth ---------------------------------------------------------------
  auto synth_opts = std::make_shared<SynthSpec>();
  auto synth_wav = std::make_shared<std::string>();
  auto synth_timeline = std::make_shared<std::string>();
  CLI::App* synth = app.add_subcommand("synth", "generate a random WAV + timeline corpus");
  synth->set_config("--config");
  synth->add_option("--utterances", synth_opts->utterances, "spoken utterance count");
  synth->add_option("--seed", synth_opts->seed, "corpus RNG seed");
  synth->add_option("--vocab-size", synth_opts->vocab_size, "distinct word count");
  synth->add_option("--out-wav", *synth_wav, "output WAV path")->required();
  synth->add_option("--out-timeline", *synth_timeline, "output timeline TSV path")
      ->required();
  synth->callback([synth_opts, synth_wav, synth_timeline] {
    const Corpus corpus = synth_corpus_random(*synth_opts);
    wav_write(corpus.clip, *synth_wav);
    timeline_write(corpus.timeline, *synth_timeline);
    int segments = 0;
    if (!corpus.timeline.entries.empty()) {
      segments = corpus.timeline.entries.back().segment_id + 1;
    }
    std::printf("wrote %s (%.3f s) and %s (%zu words, %d segments)\n",
                synth_wav->c_str(), corpus.clip.duration_s(), synth_timeline->c_str(),
                corpus.timeline.entries.size(), segments);
  });

  // --- batch ---------------------------------------------------------------
  auto batch_wav = std::make_shared<std::string>();
  auto batch_timeline = std::make_shared<std::string>();
  auto batch_backend = std::make_shared<BackendOpts>();
  auto batch_norm = std::make_shared<NormOpts>();
  CLI::App* batch = app.add_subcommand("batch", "transcribe a whole file in one pass");
  batch->set_config("--config");
  batch->add_option("--wav", *batch_wav, "input WAV path")->required();
  batch->add_option("--timeline", *batch_timeline, "ground-truth timeline TSV")
      ->required();
  add_backend_options(batch, *batch_backend);
  add_norm_options(batch, *batch_norm);
  batch->callback([batch_wav, batch_timeline, batch_backend, batch_norm] {
    const AudioClip clip = wav_read(*batch_wav);
    const Timeline timeline = timeline_read(*batch_timeline);
    const auto backend = make_backend_factory(*batch_backend, timeline)();
    const BatchResult result = run_batch(clip, timeline, *backend, batch_norm->cfg);
    std::printf("text: %s\n", result.transcription.c_str());
    print_metrics(result.report);
  });

  // --- stream --------------------------------------------------------------
  auto stream_wav = std::make_shared<std::string>();
  auto stream_timeline = std::make_shared<std::string>();
  auto stream_splitter = std::make_shared<SplitterOpts>();
  auto stream_latency = std::make_shared<LatencyOpts>();
  auto stream_backend = std::make_shared<BackendOpts>();
  auto stream_norm = std::make_shared<NormOpts>();
  auto stream_search = std::make_shared<SearchOpts>();
  auto stream_merge = std::make_shared<MergeOpts>();
  auto stream_server = std::make_shared<std::string>();
  auto stream_scale = std::make_shared<double>(1.0);
  CLI::App* stream = app.add_subcommand(
      "stream", "run one splitter/model combination over a file");
  stream->set_config("--config");
  stream->add_option("--wav", *stream_wav, "input WAV path")->required();
  stream->add_option("--timeline", *stream_timeline, "ground-truth timeline TSV")
      ->required();
  stream->add_option("--server", *stream_server,
                     "host:port of a live server; omit for the virtual clock");
  stream->add_option("--time-scale", *stream_scale,
                     "stream-time acceleration for live runs");
  add_splitter_options(stream, *stream_splitter);
  add_latency_options(stream, *stream_latency);
  add_backend_options(stream, *stream_backend);
  add_norm_options(stream, *stream_norm);
  add_search_options(stream, *stream_search);
  add_merge_options(stream, *stream_merge);
  stream->callback([stream, stream_wav, stream_timeline, stream_splitter, stream_latency,
                    stream_backend, stream_norm, stream_search, stream_merge,
                    stream_server, stream_scale] {
    const AudioClip clip = wav_read(*stream_wav);
    const Timeline timeline = timeline_read(*stream_timeline);
    const SplitterConfig splitter_cfg = resolve_splitter(stream, *stream_splitter);
    StreamResult result;
    if (stream_server->empty()) {
      const LatencyModel latency = resolve_latency(stream, *stream_latency);
      const auto backend = make_backend_factory(*stream_backend, timeline)();
      result = run_stream_virtual(clip, splitter_cfg, stream_merge->params, latency,
                                  *backend);
    } else {
      result = client_stream(clip, splitter_cfg, stream_merge->params,
                             parse_host_port(*stream_server), *stream_scale);
    }
    if (!result.complete) {
      std::fprintf(stderr, "warning: partial results (%s)\n", result.error.c_str());
    }
    std::printf("text: %s\n", result.final_text.c_str());
    const ErrorReport report =
        score_texts(reference_text(timeline), result.final_text, stream_norm->cfg);
    print_metrics(report);
    const auto measures = measure_delays(timeline, result.events, stream_search->params,
                                         result.stream_start_ts_ms);
    print_delay_summary(summarize_delays(measures));
  });

  // --- grid ----------------------------------------------------------------
  auto grid_cfg = std::make_shared<GridConfig>();
  auto grid_splitters = std::make_shared<std::string>("fixed:2,fixed:3,vad,feedback");
  auto grid_presets = std::make_shared<std::string>("tiny");
  auto grid_out = std::make_shared<std::string>();
  auto grid_wavs = std::make_shared<std::vector<std::string>>();
  auto grid_timelines = std::make_shared<std::vector<std::string>>();
  auto grid_norm = std::make_shared<NormOpts>();
  auto grid_search = std::make_shared<SearchOpts>();
  auto grid_merge = std::make_shared<MergeOpts>();
  CLI::App* grid = app.add_subcommand(
      "grid", "run the splitter x model grid and emit the quality-delay report");
  grid->set_config("--config");
  grid->add_option("--utterances", grid_cfg->synth.utterances, "synthetic utterances");
  grid->add_option("--seed", grid_cfg->synth.seed, "corpus RNG seed");
  grid->add_option("--vocab-size", grid_cfg->synth.vocab_size, "distinct word count");
  grid->add_option("--repeats", grid_cfg->repeats,
                   "corpus repetitions averaged per cell");
  grid->add_option("--parallel-files", grid_cfg->parallel_files,
                   "worker threads across a cell's audio files");
  grid->add_option("--splitters", *grid_splitters, "comma-separated splitter specs");
  grid->add_option("--presets", *grid_presets, "comma-separated latency presets");
  grid->add_option("--wav", *grid_wavs, "explicit corpus WAV (repeatable)");
  grid->add_option("--timeline", *grid_timelines,
                   "timeline TSV matching each --wav (repeatable)");
  grid->add_option("--out", *grid_out, "CSV output path (default: stdout)");
  add_norm_options(grid, *grid_norm);
  add_search_options(grid, *grid_search);
  add_merge_options(grid, *grid_merge);
  grid->callback([grid_cfg, grid_splitters, grid_presets, grid_out, grid_wavs,
                  grid_timelines, grid_norm, grid_search, grid_merge] {
    grid_cfg->norm = grid_norm->cfg;
    grid_cfg->search = grid_search->params;
    grid_cfg->merge = grid_merge->params;
    if (grid_wavs->size() != grid_timelines->size()) {
      throw ConfigError("--wav and --timeline must be given the same number of times");
    }
    for (std::size_t i = 0; i < grid_wavs->size(); ++i) {
      Corpus corpus;
      corpus.clip = wav_read((*grid_wavs)[i]);
      corpus.timeline = timeline_read((*grid_timelines)[i]);
      grid_cfg->fixed_corpora.push_back(std::move(corpus));
    }
    grid_cfg->combos.clear();
    for (const std::string& preset : split_list(*grid_presets)) {
      for (const std::string& splitter : split_list(*grid_splitters)) {
        grid_cfg->combos.push_back(GridCombo{preset, splitter});
      }
    }
    const GridReport report = run_grid(*grid_cfg);
    const std::string csv = grid_csv(report);
    if (grid_out->empty()) {
      std::fputs(csv.c_str(), stdout);
      std::fputs(dominance_lines(report).c_str(), stderr);
    } else {
      std::ofstream out(*grid_out);
      if (!out) throw ConfigError("cannot write " + *grid_out);
      out << csv;
      std::fputs(dominance_lines(report).c_str(), stdout);
    }
    for (const GridRow& row : report.rows) {
      if (row.failed) {
        std::fprintf(stderr, "row %s/%s failed: %s\n", row.model.c_str(),
                     row.splitter.c_str(), row.error.c_str());
      }
    }
  });

  // --- report --------------------------------------------------------------
  auto report_inputs = std::make_shared<std::vector<std::string>>();
  auto report_out = std::make_shared<std::string>();
  CLI::App* report_cmd =
      app.add_subcommand("report", "merge grid CSVs and recompute dominance");
  report_cmd->add_option("--in", *report_inputs, "input CSV path (repeatable)")
      ->required();
  report_cmd->add_option("--out", *report_out, "merged CSV output path");
  report_cmd->callback([report_inputs, report_out] {
    GridReport merged;
    for (const std::string& path : *report_inputs) {
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot read " + path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      const GridReport one = grid_from_csv_text(buffer.str());
      merged.rows.insert(merged.rows.end(), one.rows.begin(), one.rows.end());
    }
    merged.dominance = compute_dominance(merged.rows);
    const std::string csv = grid_csv(merged);
    if (report_out->empty()) {
      std::fputs(csv.c_str(), stdout);
      std::fputs(dominance_lines(merged).c_str(), stderr);
    } else {
      std::ofstream out(*report_out);
      if (!out) throw ConfigError("cannot write " + *report_out);
      out << csv;
      std::fputs(dominance_lines(merged).c_str(), stdout);
    }
  });

  // --- fit-latency ---------------------------------------------------------
  auto fit_points = std::make_shared<std::string>();
  auto fit_preset = std::make_shared<std::string>();
  CLI::App* fit = app.add_subcommand(
      "fit-latency", "least-squares fit of processing delay vs fragment length");
  fit->add_option("--points", *fit_points,
                  "comma list of duration_s:delay_ms measurement pairs");
  fit->add_option("--preset", *fit_preset, "fit the built-in tiny or base points");
  fit->callback([fit_points, fit_preset] {
    std::vector<std::pair<double, double>> points;
    if (!fit_preset->empty()) {
      const auto span = *fit_preset == "tiny"   ? latency_points_tiny()
                        : *fit_preset == "base" ? latency_points_base()
                                                : std::span<const std::pair<double, double>>{};
      if (span.empty()) throw ConfigError("unknown preset '" + *fit_preset + "'");
      points.assign(span.begin(), span.end());
    } else if (!fit_points->empty()) {
      for (const std::string& item : split_list(*fit_points)) {
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos) {
          throw ConfigError("expected duration:delay, got '" + item + "'");
        }
        points.emplace_back(std::stod(item.substr(0, colon)),
                            std::stod(item.substr(colon + 1)));
      }
    } else {
      throw ConfigError("fit-latency needs --points or --preset");
    }
    const LatencyFit fit_result = fit_latency_model(points);
    std::printf("intercept_ms=%.6f slope_ms_per_s=%.6f residual_ss=%.6f\n",
                fit_result.model.intercept_ms, fit_result.model.slope_ms_per_s,
                fit_result.residual_ss);
  });

  // --- serve ---------------------------------------------------------------
  auto serve_bind = std::make_shared<std::string>("127.0.0.1:8571");
  auto serve_backend = std::make_shared<BackendOpts>();
  auto serve_timeline = std::make_shared<std::string>();
  auto serve_latency = std::make_shared<LatencyOpts>();
  auto serve_scale = std::make_shared<double>(1.0);
  CLI::App* serve = app.add_subcommand("serve", "run the streaming ASR server");
  serve->set_config("--config");
  serve->add_option("--bind", *serve_bind, "host:port to listen on");
  serve->add_option("--timeline", *serve_timeline,
                    "ground-truth timeline TSV (mock backend)");
  serve->add_option("--time-scale", *serve_scale,
                    "divide simulated processing sleeps by this factor");
  add_backend_options(serve, *serve_backend);
  add_latency_options(serve, *serve_latency);
  serve->callback([serve, serve_bind, serve_backend, serve_timeline, serve_latency,
                   serve_scale] {
    Timeline timeline;
    if (serve_backend->backend == "mock") {
      if (serve_timeline->empty()) {
        throw ConfigError("mock backend needs --timeline for ground truth");
      }
      timeline = timeline_read(*serve_timeline);
    }
    ServerConfig cfg;
    const HostPort hp = parse_host_port(*serve_bind);
    cfg.host = hp.host;
    cfg.port = hp.port;
    cfg.latency = resolve_latency(serve, *serve_latency);
    cfg.time_scale = *serve_scale;
    Server server(cfg, make_backend_factory(*serve_backend, timeline));
    std::printf("listening on %s:%u\n", cfg.host.c_str(), server.port());
    std::fflush(stdout);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted.load()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    server.stop();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

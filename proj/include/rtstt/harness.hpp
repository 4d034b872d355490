#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtstt/asr.hpp"
#include "rtstt/audio.hpp"
#include "rtstt/delay.hpp"
#include "rtstt/merge.hpp"
#include "rtstt/metrics.hpp"
#include "rtstt/splitter.hpp"

namespace rtstt {

// Random-corpus recipe. Utterances are contiguous word runs separated by
// noise gaps (the silence structure VAD keys on); each utterance divides
// into contiguous reference segments, the units whose first words feed the
// delay search.
struct SynthSpec {
  int utterances = 50;
  std::uint32_t seed = 1;
  int vocab_size = 60;
  int min_word_len = 4;
  int max_word_len = 12;
  int min_utterance_words = 5;
  int max_utterance_words = 12;
  int min_segment_words = 3;
  int max_segment_words = 6;
  double min_word_s = 0.25;
  double max_word_s = 0.5;
  double min_gap_s = 0.8;
  double max_gap_s = 1.5;
  GapProfile profile{};
};

struct Corpus {
  AudioClip clip;
  Timeline timeline;
};

Corpus synth_corpus_random(const SynthSpec& spec);

// Ground-truth words joined by single spaces.
std::string reference_text(const Timeline& timeline);

struct BatchResult {
  std::string transcription;
  ErrorReport report;
};

// Single transcribe call over the whole clip: the quality baseline every
// real-time combination is compared against. Throws InvalidCorpusError when
// the timeline refers to audio beyond the clip.
BatchResult run_batch(const AudioClip& clip, const Timeline& timeline,
                      Transcriber& backend, const NormalizationConfig& norm = {});

struct GridCombo {
  std::string model;     // latency preset name: "tiny" or "base"
  std::string splitter;  // splitter spec: "fixed:2", "vad", "feedback", ...
};

struct GridConfig {
  SynthSpec synth;
  std::vector<Corpus> fixed_corpora;  // when nonempty, used instead of synthesis
  std::vector<GridCombo> combos;
  MergeParams merge{};
  SearchParams search{};
  NormalizationConfig norm{};
  int repeats = 3;        // corpora seeded seed, seed+1, ... results averaged
  int parallel_files = 1; // worker threads across a cell's audio files
};

struct GridRow {
  std::string model;
  std::string splitter;
  double wer = 0.0;
  double mer = 0.0;
  double wil = 0.0;
  std::optional<double> mean_delay_ms;
  int n_found = 0;
  int n_word_not_found = 0;
  int n_context_not_found = 0;
  int n_false_positives = 0;
  bool failed = false;
  std::string error;
};

// Dominance edge: rows[winner] is strictly better than rows[loser] on both
// axes, compared only within one latency preset.
struct DominanceEdge {
  std::size_t winner = 0;
  std::size_t loser = 0;
};

struct GridReport {
  std::vector<GridRow> rows;
  std::vector<DominanceEdge> dominance;
};

GridReport run_grid(const GridConfig& cfg);

// Recomputed over the rows currently in the report.
std::vector<DominanceEdge> compute_dominance(const std::vector<GridRow>& rows);

inline constexpr const char* kGridCsvHeader =
    "model,splitter,wer,mer,wil,mean_delay_ms,n_found,n_word_not_found,"
    "n_context_not_found,n_false_positives";

std::string grid_csv(const GridReport& report);
GridReport grid_from_csv_text(const std::string& text);

// "tiny/feedback dominates tiny/fixed:3" lines, one per edge.
std::string dominance_lines(const GridReport& report);

}  // namespace rtstt

#include "rtstt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <random>
#include <sstream>
#include <unordered_set>

#include "rtstt/errors.hpp"
#include "rtstt/transport.hpp"

namespace rtstt {

namespace {

std::vector<std::string> make_vocabulary(std::mt19937& rng, const SynthSpec& spec) {
  std::uniform_int_distribution<int> len_dist(spec.min_word_len, spec.max_word_len);
  std::uniform_int_distribution<int> letter_dist(0, 25);
  std::unordered_set<std::string> seen;
  std::vector<std::string> vocab;
  vocab.reserve(static_cast<std::size_t>(spec.vocab_size));
  while (vocab.size() < static_cast<std::size_t>(spec.vocab_size)) {
    std::string word(static_cast<std::size_t>(len_dist(rng)), 'a');
    for (char& c : word) c = static_cast<char>('a' + letter_dist(rng));
    if (seen.insert(word).second) vocab.push_back(std::move(word));
  }
  return vocab;
}

}  // namespace

Corpus synth_corpus_random(const SynthSpec& spec) {
  if (spec.utterances <= 0 || spec.vocab_size <= 0 ||
      spec.min_utterance_words < 1 || spec.max_utterance_words < spec.min_utterance_words ||
      spec.min_segment_words < 1 || spec.max_segment_words < spec.min_segment_words ||
      spec.min_word_s <= 0.0 || spec.max_word_s < spec.min_word_s ||
      spec.min_gap_s <= 0.0 || spec.max_gap_s < spec.min_gap_s) {
    throw ConfigError("synthesis parameters out of range");
  }
  std::mt19937 rng(spec.seed);
  const std::vector<std::string> vocab = make_vocabulary(rng, spec);
  std::uniform_int_distribution<int> word_count_dist(spec.min_utterance_words,
                                                     spec.max_utterance_words);
  std::uniform_int_distribution<int> segment_size_dist(spec.min_segment_words,
                                                       spec.max_segment_words);
  std::uniform_int_distribution<std::size_t> vocab_dist(0, vocab.size() - 1);
  std::uniform_real_distribution<double> word_s_dist(spec.min_word_s, spec.max_word_s);
  std::uniform_real_distribution<double> gap_s_dist(spec.min_gap_s, spec.max_gap_s);

  Timeline timeline;
  double t = gap_s_dist(rng);  // leading silence lets VAD calibrate and settle
  int segment_id = 0;
  for (int u = 0; u < spec.utterances; ++u) {
    int remaining = word_count_dist(rng);
    while (remaining > 0) {
      int seg_words = std::min(remaining, segment_size_dist(rng));
      // A sub-minimum leftover cannot stand alone; fold it into this segment.
      if (remaining - seg_words < spec.min_segment_words) seg_words = remaining;
      for (int w = 0; w < seg_words; ++w) {
        const double dur = word_s_dist(rng);
        timeline.entries.push_back(
            WordTiming{vocab[vocab_dist(rng)], t, t + dur, segment_id});
        t += dur;
      }
      remaining -= seg_words;
      ++segment_id;
    }
    t += gap_s_dist(rng);
  }
  // Drop the final gap: the clip ends right at the last spoken word.
  if (!timeline.entries.empty()) t = timeline.entries.back().end_s;

  Corpus corpus;
  corpus.timeline = std::move(timeline);
  validate_timeline(corpus.timeline);
  corpus.clip = synth_corpus(corpus.timeline, spec.profile);
  return corpus;
}

std::string reference_text(const Timeline& timeline) {
  std::string out;
  for (const WordTiming& wt : timeline.entries) {
    if (!out.empty()) out.push_back(' ');
    out += wt.word;
  }
  return out;
}

BatchResult run_batch(const AudioClip& clip, const Timeline& timeline,
                      Transcriber& backend, const NormalizationConfig& norm) {
  validate_timeline(timeline);
  if (!timeline.entries.empty()) {
    const double last_end = timeline.entries.back().end_s;
    if (last_end > clip.duration_s() + 1e-9) {
      throw InvalidCorpusError("timeline extends past the audio: last word ends at " +
                               std::to_string(last_end) + " s in a " +
                               std::to_string(clip.duration_s()) + " s clip");
    }
  }
  AudioFragment whole;
  whole.samples = clip.samples;
  whole.seq = 0;
  whole.capture_start_s = 0.0;
  BatchResult result;
  result.transcription = backend.transcribe(whole);
  result.report = score_texts(reference_text(timeline), result.transcription, norm);
  return result;
}

std::vector<DominanceEdge> compute_dominance(const std::vector<GridRow>& rows) {
  std::vector<DominanceEdge> edges;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (i == j) continue;
      const GridRow& a = rows[i];
      const GridRow& b = rows[j];
      if (a.failed || b.failed) continue;
      if (a.model != b.model) continue;  // only within one latency preset
      if (!a.mean_delay_ms || !b.mean_delay_ms) continue;
      if (dominates(QualityDelayPoint{a.wer, *a.mean_delay_ms},
                    QualityDelayPoint{b.wer, *b.mean_delay_ms})) {
        edges.push_back(DominanceEdge{i, j});
      }
    }
  }
  return edges;
}

namespace {

struct CellPartial {
  ErrorReport scored;
  DelaySummary summary;
};

CellPartial run_cell_file(const Corpus& corpus, const SplitterConfig& splitter_cfg,
                          const GridConfig& cfg, const LatencyModel& latency) {
  MockTranscriber backend(corpus.timeline);  // fresh instance per stream
  const StreamResult stream =
      run_stream_virtual(corpus.clip, splitter_cfg, cfg.merge, latency, backend);
  CellPartial partial;
  partial.scored =
      score_texts(reference_text(corpus.timeline), stream.final_text, cfg.norm);
  const auto measures = measure_delays(corpus.timeline, stream.events, cfg.search,
                                       stream.stream_start_ts_ms);
  partial.summary = summarize_delays(measures);
  return partial;
}

}  // namespace

GridReport run_grid(const GridConfig& cfg) {
  if (cfg.combos.empty()) throw ConfigError("grid needs at least one combination");
  if (cfg.repeats < 1) throw ConfigError("repeats must be >= 1");
  if (cfg.parallel_files < 1) throw ConfigError("parallel_files must be >= 1");

  // All combinations see the same corpora so rows are comparable.
  std::vector<Corpus> corpora;
  if (!cfg.fixed_corpora.empty()) {
    corpora = cfg.fixed_corpora;
  } else {
    corpora.reserve(static_cast<std::size_t>(cfg.repeats));
    for (int r = 0; r < cfg.repeats; ++r) {
      SynthSpec spec = cfg.synth;
      spec.seed = cfg.synth.seed + static_cast<std::uint32_t>(r);
      corpora.push_back(synth_corpus_random(spec));
    }
  }

  GridReport report;
  for (const GridCombo& combo : cfg.combos) {
    GridRow row;
    row.model = combo.model;
    row.splitter = combo.splitter;
    try {
      const SplitterConfig splitter_cfg = parse_splitter_spec(combo.splitter);
      const LatencyModel latency = latency_preset(combo.model);

      // Files are independent; partials reduce in file order either way.
      std::vector<CellPartial> partials(corpora.size());
      if (cfg.parallel_files > 1 && corpora.size() > 1) {
        const auto batch = static_cast<std::size_t>(cfg.parallel_files);
        for (std::size_t base = 0; base < corpora.size(); base += batch) {
          const std::size_t end = std::min(corpora.size(), base + batch);
          std::vector<std::future<CellPartial>> futures;
          futures.reserve(end - base);
          for (std::size_t i = base; i < end; ++i) {
            futures.push_back(std::async(std::launch::async, run_cell_file,
                                         std::cref(corpora[i]), std::cref(splitter_cfg),
                                         std::cref(cfg), std::cref(latency)));
          }
          for (std::size_t i = base; i < end; ++i) partials[i] = futures[i - base].get();
        }
      } else {
        for (std::size_t i = 0; i < corpora.size(); ++i) {
          partials[i] = run_cell_file(corpora[i], splitter_cfg, cfg, latency);
        }
      }

      double wer_sum = 0.0;
      double mer_sum = 0.0;
      double wil_sum = 0.0;
      double delay_sum = 0.0;
      for (const CellPartial& partial : partials) {
        wer_sum += partial.scored.wer;
        mer_sum += partial.scored.mer;
        wil_sum += partial.scored.wil;
        if (partial.summary.mean_delay_ms) {
          delay_sum += *partial.summary.mean_delay_ms * partial.summary.n_found;
        }
        row.n_found += partial.summary.n_found;
        row.n_word_not_found += partial.summary.n_word_not_found;
        row.n_context_not_found += partial.summary.n_context_not_found;
        row.n_false_positives += partial.summary.n_false_positive;
      }
      const auto n_files = static_cast<double>(corpora.size());
      row.wer = wer_sum / n_files;
      row.mer = mer_sum / n_files;
      row.wil = wil_sum / n_files;
      if (row.n_found > 0) row.mean_delay_ms = delay_sum / row.n_found;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  report.dominance = compute_dominance(report.rows);
  return report;
}

std::string grid_csv(const GridReport& report) {
  std::ostringstream out;
  out << kGridCsvHeader << "\n";
  for (const GridRow& row : report.rows) {
    out << row.model << ',' << row.splitter << ',';
    if (row.failed) {
      out << "nan,nan,nan,nan,0,0,0,0\n";
      continue;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,", row.wer, row.mer, row.wil);
    out << buf;
    if (row.mean_delay_ms) {
      std::snprintf(buf, sizeof buf, "%.3f", *row.mean_delay_ms);
      out << buf;
    } else {
      out << "nan";
    }
    out << ',' << row.n_found << ',' << row.n_word_not_found << ','
        << row.n_context_not_found << ',' << row.n_false_positives << "\n";
  }
  return out.str();
}

GridReport grid_from_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kGridCsvHeader) {
    throw ConfigError("unrecognized report header: '" + line + "'");
  }
  GridReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) {
      throw ConfigError("malformed report row: '" + line + "'");
    }
    GridRow row;
    row.model = cells[0];
    row.splitter = cells[1];
    try {
      row.wer = std::stod(cells[2]);
      row.mer = std::stod(cells[3]);
      row.wil = std::stod(cells[4]);
      const double delay = std::stod(cells[5]);
      if (!std::isnan(delay)) row.mean_delay_ms = delay;
      row.n_found = std::stoi(cells[6]);
      row.n_word_not_found = std::stoi(cells[7]);
      row.n_context_not_found = std::stoi(cells[8]);
      row.n_false_positives = std::stoi(cells[9]);
    } catch (const std::exception&) {
      throw ConfigError("malformed report row: '" + line + "'");
    }
    row.failed = std::isnan(row.wer);
    report.rows.push_back(std::move(row));
  }
  report.dominance = compute_dominance(report.rows);
  return report;
}

std::string dominance_lines(const GridReport& report) {
  std::string out;
  for (const DominanceEdge& edge : report.dominance) {
    const GridRow& w = report.rows[edge.winner];
    const GridRow& l = report.rows[edge.loser];
    out += w.model + "/" + w.splitter + " dominates " + l.model + "/" + l.splitter + "\n";
  }
  return out;
}

}  // namespace rtstt

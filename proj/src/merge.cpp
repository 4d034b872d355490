#include "rtstt/merge.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace rtstt {

namespace {

bool tokens_equal(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::istringstream ss(text);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

MergeResult merge_transcription(RollingTranscript& transcript,
                                std::span<const std::string> new_words,
                                int64_t arrival_ts_ms) {
  MergeResult result;
  if (new_words.empty()) return result;

  const int m = std::max(1, transcript.params.words_checked);
  const size_t tail_len =
      std::min<size_t>(static_cast<size_t>(std::max(1, transcript.params.n_words)),
                       transcript.words.size());
  const size_t tail_base = transcript.words.size() - tail_len;

  // Rightmost match in new_words, earliest position in the tail.
  ptrdiff_t best_new = -1;
  size_t best_tail = 0;
  if (tail_len >= static_cast<size_t>(m) &&
      new_words.size() >= static_cast<size_t>(m)) {
    for (size_t i = 0; i + m <= new_words.size(); ++i) {
      for (size_t p = 0; p + m <= tail_len; ++p) {
        bool match = true;
        for (int k = 0; k < m && match; ++k) {
          match = tokens_equal(new_words[i + k],
                               transcript.words[tail_base + p + k].token);
        }
        if (match && (best_new < static_cast<ptrdiff_t>(i) ||
                      (best_new == static_cast<ptrdiff_t>(i) && p < best_tail))) {
          best_new = static_cast<ptrdiff_t>(i);
          best_tail = p;
        }
      }
    }
  }

  size_t append_from = 0;
  if (best_new >= 0) {
    const size_t cut = tail_base + best_tail;
    for (size_t j = cut; j < transcript.words.size(); ++j) {
      result.removed.push_back(transcript.words[j].token);
    }
    result.replaced_count = static_cast<int>(transcript.words.size() - cut);
    transcript.words.resize(cut);
    append_from = static_cast<size_t>(best_new);
  }

  for (size_t i = append_from; i < new_words.size(); ++i) {
    TranscriptWord w;
    w.token = new_words[i];
    w.arrival_ts_ms = arrival_ts_ms;
    const size_t appended_so_far = i - append_from;
    w.provenance = appended_so_far < static_cast<size_t>(result.replaced_count)
                       ? Provenance::Replaced
                       : Provenance::Stable;
    result.appended.push_back(w.token);
    if (w.provenance == Provenance::Stable) result.net_new.push_back(w.token);
    transcript.words.push_back(std::move(w));
  }
  return result;
}

std::string render_transcript(const RollingTranscript& transcript) {
  std::string out;
  for (const auto& w : transcript.words) {
    if (!out.empty()) out += ' ';
    out += w.token;
  }
  return out;
}

namespace {

// Collapse whitespace runs and fold case; enough to spot repeated outputs.
std::string normalized_key(const std::string& text) {
  std::string out;
  bool in_space = true;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out += ' ';
    in_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::vector<std::string> dedup_repetition_artifact(
    std::span<const std::string> events) {
  std::vector<std::string> out;
  std::string last_key;
  bool have_last = false;
  for (const auto& e : events) {
    const std::string key = normalized_key(e);
    if (have_last && key == last_key) continue;
    out.push_back(e);
    last_key = key;
    have_last = true;
  }
  return out;
}

std::vector<TranscriptEvent> dedup_repetition_artifact(
    std::span<const TranscriptEvent> events) {
  std::vector<TranscriptEvent> out;
  std::string last_key;
  bool have_last = false;
  for (const auto& e : events) {
    const std::string key = normalized_key(e.text);
    if (have_last && key == last_key) continue;
    out.push_back(e);
    last_key = key;
    have_last = true;
  }
  return out;
}

}  // namespace rtstt

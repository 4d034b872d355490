#pragma once

#include <span>
#include <string>
#include <vector>

namespace rtstt {

// Rule toggles, applied in exactly this order.
struct NormalizationConfig {
  bool tag_punctuation = true;    // <PERIOD> and peers -> punctuation marks
  bool strip_annotations = true;  // bracketed music/silence annotations
  bool numbers_to_words = true;   // integer numerals -> English words
  bool expand_contractions = true;
  bool url_textualize = true;     // '/' -> " slash ", '.' -> " dot " in URLs
  bool strip_music_symbol = true; // the note symbol some engines emit
  bool collapse_whitespace = true;
  bool lowercase = true;
};

std::string normalize(const std::string& text, const NormalizationConfig& cfg);

inline std::string normalize(const std::string& text) {
  return normalize(text, NormalizationConfig{});
}

// English words for a non-negative integer up to 999,999,999.
std::string number_to_words(long long value);

struct AlignmentCounts {
  int hits = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
};

// Minimal-cost word alignment with unit costs. H+S+D == len(ref) and
// H+S+I == len(hyp). Ties prefer the diagonal (match/substitution).
AlignmentCounts align_words(std::span<const std::string> ref_tokens,
                            std::span<const std::string> hyp_tokens);

struct ErrorReport {
  int hits = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  double wer = 0.0;
  double mer = 0.0;
  double wil = 0.0;
};

// wer = (S+D+I)/(H+S+D), mer = (S+D+I)/(H+S+D+I),
// wil = 1 - H^2 / ((H+S+D)(H+S+I)); empty-vs-empty yields all zeros.
ErrorReport error_rates(const AlignmentCounts& counts);

// Convenience: normalize both sides, tokenize, align, rate.
ErrorReport score_texts(const std::string& reference,
                        const std::string& hypothesis,
                        const NormalizationConfig& cfg = {});

}  // namespace rtstt

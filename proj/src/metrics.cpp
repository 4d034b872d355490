#include "rtstt/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "rtstt/merge.hpp"  // tokenize

namespace rtstt {

namespace {

std::string fold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// `<PERIOD>` and friends become punctuation glued to the preceding word.
std::string apply_tag_punctuation(const std::string& text) {
  static constexpr std::array<std::pair<std::string_view, char>, 4> kTags = {{
      {"PERIOD", '.'},
      {"COMMA", ','},
      {"QUESTIONMARK", '?'},
      {"EXCLAMATIONPOINT", '!'},
  }};
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    bool replaced = false;
    if (text[i] == '<') {
      for (const auto& [name, mark] : kTags) {
        const size_t end = i + 1 + name.size();
        if (end < text.size() && text[end] == '>' &&
            iequals(std::string_view(text).substr(i + 1, name.size()), name)) {
          while (!out.empty() && is_space(out.back())) out.pop_back();
          out.push_back(mark);
          i = end + 1;
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(text[i++]);
  }
  return out;
}

bool in_set(std::string_view needle, std::span<const std::string_view> set) {
  const std::string f = fold(needle);
  return std::find(set.begin(), set.end(), std::string_view(f)) != set.end();
}

// Known non-speech annotations disappear; unknown tags pass through.
std::string apply_strip_annotations(const std::string& text) {
  static constexpr std::array<std::string_view, 4> kAngle = {"music", "noise", "sil",
                                                             "other"};
  static constexpr std::array<std::string_view, 6> kBracket = {
      "music", "noise", "silence", "applause", "laughter", "blank_audio"};
  static constexpr std::array<std::string_view, 1> kParen = {"music"};
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    const char open = text[i];
    char close = 0;
    std::span<const std::string_view> set;
    if (open == '<') {
      close = '>';
      set = kAngle;
    } else if (open == '[') {
      close = ']';
      set = kBracket;
    } else if (open == '(') {
      close = ')';
      set = kParen;
    }
    if (close != 0) {
      const size_t end = text.find(close, i + 1);
      if (end != std::string::npos &&
          in_set(std::string_view(text).substr(i + 1, end - i - 1), set)) {
        out.push_back(' ');
        i = end + 1;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

// Digit runs of at most nine digits become English words; longer runs stay.
std::string apply_numbers_to_words(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (is_digit(text[i])) {
      size_t j = i;
      while (j < text.size() && is_digit(text[j])) ++j;
      const size_t run = j - i;
      if (run <= 9) {
        if (!out.empty() && !is_space(out.back())) out.push_back(' ');
        out += number_to_words(std::stoll(text.substr(i, run)));
        if (j < text.size() && !is_space(text[j])) out.push_back(' ');
      } else {
        out.append(text, i, run);
      }
      i = j;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

struct TokenParts {
  std::string_view lead;   // leading punctuation
  std::string_view core;   // the interesting middle
  std::string_view trail;  // trailing punctuation
};

bool is_edge_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' ||
         c == '"' || c == '(' || c == ')' || c == '[' || c == ']';
}

TokenParts split_token(std::string_view tok) {
  size_t b = 0;
  while (b < tok.size() && is_edge_punct(tok[b])) ++b;
  size_t e = tok.size();
  while (e > b && is_edge_punct(tok[e - 1])) --e;
  return {tok.substr(0, b), tok.substr(b, e - b), tok.substr(e)};
}

// Rewrites each whitespace-delimited token; inter-token whitespace survives.
template <typename Fn>
std::string map_tokens(const std::string& text, Fn&& fn) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    out += fn(std::string_view(text).substr(i, j - i));
    i = j;
  }
  return out;
}

std::string match_case(std::string expansion, std::string_view original) {
  if (!original.empty() && std::isupper(static_cast<unsigned char>(original[0])) &&
      !expansion.empty()) {
    expansion[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(expansion[0])));
  }
  return expansion;
}

std::string apply_expand_contractions(const std::string& text) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 9>
      kSpecials = {{
          {"it's", "it is"},
          {"that's", "that is"},
          {"what's", "what is"},
          {"who's", "who is"},
          {"there's", "there is"},
          {"here's", "here is"},
          {"let's", "let us"},
          {"won't", "will not"},
          {"can't", "can not"},
      }};
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 6>
      kSuffixes = {{
          {"n't", " not"},
          {"'ll", " will"},
          {"'re", " are"},
          {"'ve", " have"},
          {"'m", " am"},
          {"'d", " would"},
      }};
  return map_tokens(text, [](std::string_view tok) -> std::string {
    const auto [lead, core, trail] = split_token(tok);
    if (core.empty()) return std::string(tok);
    for (const auto& [from, to] : kSpecials) {
      if (iequals(core, from)) {
        return std::string(lead) + match_case(std::string(to), core) +
               std::string(trail);
      }
    }
    for (const auto& [suffix, to] : kSuffixes) {
      if (core.size() > suffix.size() &&
          iequals(core.substr(core.size() - suffix.size()), suffix)) {
        return std::string(lead) + std::string(core.substr(0, core.size() - suffix.size())) +
               std::string(to) + std::string(trail);
      }
    }
    return std::string(tok);
  });
}

bool looks_like_url(std::string_view core) {
  if (core.find("://") != std::string_view::npos) return true;
  static constexpr std::array<std::string_view, 7> kTlds = {"com", "org", "net", "edu",
                                                            "gov", "io",  "dev"};
  const size_t slash = core.find('/');
  const std::string_view host = core.substr(0, slash);
  const size_t dot = host.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 >= host.size()) return false;
  return in_set(host.substr(dot + 1), kTlds);
}

std::string apply_url_textualize(const std::string& text) {
  return map_tokens(text, [](std::string_view tok) -> std::string {
    const auto [lead, core, trail] = split_token(tok);
    if (core.empty() || !looks_like_url(core)) return std::string(tok);
    std::string spoken;
    spoken.reserve(core.size() + 16);
    for (char c : core) {
      if (c == '/') {
        spoken += " slash ";
      } else if (c == '.') {
        spoken += " dot ";
      } else {
        spoken.push_back(c);
      }
    }
    return std::string(lead) + spoken + std::string(trail);
  });
}

std::string apply_strip_music_symbol(const std::string& text) {
  static constexpr std::string_view kNote = "\xE2\x99\xAA";  // U+266A
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, kNote.size(), kNote) == 0) {
      out.push_back(' ');
      i += kNote.size();
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

std::string apply_collapse_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string number_to_words(long long value) {
  if (value < 0 || value > 999'999'999) {
    throw std::invalid_argument("number_to_words: value out of supported range");
  }
  static constexpr std::array<std::string_view, 20> kOnes = {
      "zero",    "one",     "two",       "three",    "four",
      "five",    "six",     "seven",     "eight",    "nine",
      "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
      "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
  static constexpr std::array<std::string_view, 10> kTens = {
      "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty",
      "ninety"};
  if (value == 0) return "zero";
  std::vector<std::string_view> parts;
  auto under_thousand = [&](long long n) {
    if (n >= 100) {
      parts.push_back(kOnes[static_cast<size_t>(n / 100)]);
      parts.push_back("hundred");
      n %= 100;
    }
    if (n >= 20) {
      parts.push_back(kTens[static_cast<size_t>(n / 10)]);
      n %= 10;
      if (n > 0) parts.push_back(kOnes[static_cast<size_t>(n)]);
    } else if (n > 0) {
      parts.push_back(kOnes[static_cast<size_t>(n)]);
    }
  };
  const long long millions = value / 1'000'000;
  const long long thousands = (value / 1'000) % 1'000;
  const long long rest = value % 1'000;
  if (millions > 0) {
    under_thousand(millions);
    parts.push_back("million");
  }
  if (thousands > 0) {
    under_thousand(thousands);
    parts.push_back("thousand");
  }
  if (rest > 0) under_thousand(rest);
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += parts[i];
  }
  return out;
}

std::string normalize(const std::string& text, const NormalizationConfig& cfg) {
  std::string s = text;
  if (cfg.tag_punctuation) s = apply_tag_punctuation(s);
  if (cfg.strip_annotations) s = apply_strip_annotations(s);
  if (cfg.numbers_to_words) s = apply_numbers_to_words(s);
  if (cfg.expand_contractions) s = apply_expand_contractions(s);
  if (cfg.url_textualize) s = apply_url_textualize(s);
  if (cfg.strip_music_symbol) s = apply_strip_music_symbol(s);
  if (cfg.collapse_whitespace) s = apply_collapse_whitespace(s);
  if (cfg.lowercase) s = fold(s);
  return s;
}

AlignmentCounts align_words(std::span<const std::string> ref_tokens,
                            std::span<const std::string> hyp_tokens) {
  const size_t n = ref_tokens.size();
  const size_t m = hyp_tokens.size();
  // cost[i][j]: minimal edits aligning ref[0..i) with hyp[0..j).
  std::vector<std::vector<int>> cost(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) cost[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) cost[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int diag = cost[i - 1][j - 1] + (ref_tokens[i - 1] == hyp_tokens[j - 1] ? 0 : 1);
      const int del = cost[i - 1][j] + 1;
      const int ins = cost[i][j - 1] + 1;
      cost[i][j] = std::min({diag, del, ins});
    }
  }
  AlignmentCounts counts;
  size_t i = n;
  size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool match = ref_tokens[i - 1] == hyp_tokens[j - 1];
      const int diag = cost[i - 1][j - 1] + (match ? 0 : 1);
      if (cost[i][j] == diag) {  // diagonal first on ties
        if (match) {
          ++counts.hits;
        } else {
          ++counts.substitutions;
        }
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++counts.deletions;
      --i;
    } else {
      ++counts.insertions;
      --j;
    }
  }
  return counts;
}

ErrorReport error_rates(const AlignmentCounts& counts) {
  ErrorReport report;
  report.hits = counts.hits;
  report.substitutions = counts.substitutions;
  report.deletions = counts.deletions;
  report.insertions = counts.insertions;
  const double h = counts.hits;
  const double errs = counts.substitutions + counts.deletions + counts.insertions;
  const double n_ref = h + counts.substitutions + counts.deletions;
  const double n_hyp = h + counts.substitutions + counts.insertions;
  if (errs == 0.0) return report;  // identity (or empty vs empty): all rates 0
  report.wer = n_ref > 0.0 ? errs / n_ref : static_cast<double>(counts.insertions);
  report.mer = errs / (h + errs);
  report.wil = (n_ref > 0.0 && n_hyp > 0.0) ? 1.0 - (h * h) / (n_ref * n_hyp) : 1.0;
  return report;
}

ErrorReport score_texts(const std::string& reference, const std::string& hypothesis,
                        const NormalizationConfig& cfg) {
  const std::vector<std::string> ref = tokenize(normalize(reference, cfg));
  const std::vector<std::string> hyp = tokenize(normalize(hypothesis, cfg));
  return error_rates(align_words(ref, hyp));
}

}  // namespace rtstt

#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "prove/core.hpp"

namespace prove {

// ---------------------------------------------------------------------------
// Fetching

struct FetchOptions {
  std::chrono::milliseconds timeout{20000};
  long max_redirects = 10;
  bool offline = false;
  std::string user_agent = "prove-fetch/1.0";
};

struct FetchResult {
  std::string final_url;
  std::string html;
};

// http(s) URLs go over the network following redirects; file: URLs are read
// verbatim from disk and keep their URL as final_url. Errors: kUnavailable
// (4xx/5xx, connection failure, missing file), kNotHtml, kTimeout, kOffline
// (network URL while offline), kInvalidArgument (unsupported URL).
FetchResult fetch(const std::string& url, const FetchOptions& options = {});

// Fetches many URLs with at most max_concurrent transfers in flight. Results
// come back in input order; a failed URL yields its error message instead.
struct FetchOutcome {
  std::string url;
  std::optional<FetchResult> result;
  std::optional<Error> error;
};
std::vector<FetchOutcome> fetch_all(const std::vector<std::string>& urls,
                                    const FetchOptions& options, int max_concurrent);

// ---------------------------------------------------------------------------
// Cleaning

// Rule-based HTML to plain text. Rules, in order:
//   1. drop script, style, code, noscript and template elements;
//   2. collapse whitespace inside text (line breaks inside a paragraph do not
//      split sentences);
//   3. drop boilerplate: nav, footer, role="navigation", headers holding
//      navigation, tables of contents, and <head> apart from <title>;
//   4. join text split across sequential sibling tags of the same name when
//      the first fragment has no terminal punctuation;
//   5. end every block with a full stop when it lacks terminal punctuation;
//   6. strip the remaining markup.
// Blocks are joined with single spaces. Malformed markup is handled leniently.
std::string clean_html(std::string_view html);

// ---------------------------------------------------------------------------
// Segmentation

struct SegmentList {
  std::vector<std::string> segments;

  std::size_t size() const { return segments.size(); }
  bool empty() const { return segments.empty(); }
};

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual SegmentList segment(std::string_view text) const = 0;
};

// Splits after '.', '!' or '?' (plus closing quotes/brackets) when followed by
// whitespace and then an upper-case letter, a digit, or an opening
// quote/bracket before one. A full stop does not end a sentence when the word
// it closes is a listed abbreviation or a single upper-case initial.
class RuleSegmenter final : public Segmenter {
 public:
  // Uses the bundled English abbreviation list.
  RuleSegmenter();
  explicit RuleSegmenter(std::unordered_set<std::string> abbreviations);

  static RuleSegmenter from_file(const std::string& path);

  SegmentList segment(std::string_view text) const override;

  // True when a full stop after `word` (which includes the stop) must not be
  // treated as a sentence end.
  bool is_guarded(std::string_view word) const;
  const std::unordered_set<std::string>& abbreviations() const { return abbreviations_; }

 private:
  std::unordered_set<std::string> abbreviations_;
};

// The bundled list, one abbreviation per entry, stops included.
std::unordered_set<std::string> default_abbreviations();
std::unordered_set<std::string> parse_abbreviations(std::string_view text);

SegmentList segment(std::string_view text);

// ---------------------------------------------------------------------------
// Windowing

struct WindowConfig {
  std::set<std::size_t> sizes = {1, 2};

  void check() const;
};

// All n-sized sliding-window concatenations for n in cfg.sizes, ordered by
// window size then start index. Segments are joined with single spaces.
std::vector<Passage> window(const SegmentList& s, const WindowConfig& cfg);

// Space-joins segments[start .. start + n - 1].
std::string join_segments(const SegmentList& s, std::size_t start, std::size_t n);

}  // namespace prove

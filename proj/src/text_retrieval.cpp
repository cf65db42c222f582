#include "prove/text_retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "abbreviations_data.hpp"
#include "html_dom.hpp"

namespace prove {

// ---------------------------------------------------------------------------
// Cleaning

namespace {

using html::Node;

const std::unordered_set<std::string_view> kCodeElements = {"script", "style", "code",
                                                            "noscript", "template"};

const std::unordered_set<std::string_view> kBoilerplateElements = {"nav", "footer"};

const std::unordered_set<std::string_view> kBlockElements = {
    "address", "article", "aside",  "blockquote", "body",    "caption", "center", "dd",
    "details", "dialog",  "div",    "dl",         "dt",      "fieldset", "figcaption",
    "figure",  "footer",  "form",   "h1",         "h2",      "h3",      "h4",     "h5",
    "h6",      "header",  "hr",     "html",       "legend",  "li",      "main",   "menu",
    "nav",     "ol",      "option", "p",          "pre",     "section", "select", "summary",
    "table",   "tbody",   "td",     "tfoot",      "th",      "thead",   "title",  "tr",
    "ul"};

bool is_navigation(const Node& n) {
  return n.is_element() && (n.tag == "nav" || n.attribute("role") == "navigation");
}

bool contains_navigation(const Node& n) {
  for (const auto& c : n.children) {
    if (is_navigation(c) || contains_navigation(c)) return true;
  }
  return false;
}

bool is_table_of_contents(const Node& n) {
  const auto id = n.attribute("id");
  return id == "toc" || id == "table-of-contents" || n.has_class("toc") ||
         n.has_class("table-of-contents") || n.attribute("role") == "doc-toc";
}

bool is_boilerplate(const Node& n) {
  if (kBoilerplateElements.contains(n.tag) || is_navigation(n)) return true;
  if (n.tag == "header" && contains_navigation(n)) return true;
  return is_table_of_contents(n);
}

void prune(Node& node) {
  auto& kids = node.children;
  kids.erase(std::remove_if(kids.begin(), kids.end(),
                            [&](const Node& c) {
                              if (!c.is_element()) return false;
                              if (kCodeElements.contains(c.tag)) return true;
                              if (is_boilerplate(c)) return true;
                              return node.tag == "head" && c.tag != "title";
                            }),
             kids.end());
  for (auto& c : kids) {
    if (c.is_element()) prune(c);
  }
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return is_space(static_cast<unsigned char>(c)); });
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char ch : s) {
    if (is_space(static_cast<unsigned char>(ch))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(ch);
  }
  return out;
}

// Length of a trailing run of closing quotes/brackets, in bytes.
std::size_t closer_suffix(std::string_view s) {
  static const std::string_view kMultiByte[] = {"”", "’", "»"};
  std::size_t n = 0;
  for (;;) {
    std::string_view rest = s.substr(0, s.size() - n);
    if (rest.empty()) return n;
    const char c = rest.back();
    if (c == '"' || c == '\'' || c == ')' || c == ']' || c == '}') {
      ++n;
      continue;
    }
    bool matched = false;
    for (auto mb : kMultiByte) {
      if (rest.ends_with(mb)) {
        n += mb.size();
        matched = true;
        break;
      }
    }
    if (!matched) return n;
  }
}

bool ends_with_terminal(std::string_view s) {
  s.remove_suffix(closer_suffix(s));
  if (s.empty()) return false;
  const char c = s.back();
  return c == '.' || c == '!' || c == '?' || s.ends_with("…");
}

std::string finish_block(std::string_view raw) {
  std::string text = collapse_whitespace(raw);
  // No space before punctuation.
  std::string fixed;
  fixed.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == ' ' && i + 1 < text.size() &&
        std::string_view(".,;:!?").find(text[i + 1]) != std::string_view::npos) {
      continue;
    }
    fixed.push_back(text[i]);
  }
  if (fixed.empty() || ends_with_terminal(fixed)) return fixed;
  const char last = fixed.back();
  if (last == ',' || last == ';' || last == ':') {
    fixed.back() = '.';
  } else {
    fixed.push_back('.');
  }
  return fixed;
}

enum class TokenKind { kText, kSpace, kBreak, kJoin };

struct Token {
  TokenKind kind;
  std::string text;
};

class Emitter {
 public:
  void element_children(const Node& node) {
    const auto& kids = node.children;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const Node& child = kids[i];
      if (child.is_text()) {
        tokens_.push_back({TokenKind::kText, child.text});
        continue;
      }
      if (child.tag == "br") {
        tokens_.push_back({TokenKind::kSpace, {}});
        continue;
      }
      const bool block = kBlockElements.contains(child.tag);
      if (block) tokens_.push_back({TokenKind::kBreak, {}});
      element_children(child);
      if (block) tokens_.push_back({TokenKind::kBreak, {}});

      const Node* next = next_significant(kids, i + 1);
      if (next != nullptr && next->is_element() && next->tag == child.tag) {
        // Inline fragments continue while the sentence is open; block siblings
        // join only when neither is a finished sentence.
        const std::string text = collapse_whitespace(html::text_content(child));
        bool join = !text.empty() && !ends_with_terminal(text);
        if (join && block) {
          const std::string after = collapse_whitespace(html::text_content(*next));
          join = !after.empty() && !ends_with_terminal(after);
        }
        if (join) {
          tokens_.push_back({TokenKind::kJoin, {}});
        } else if (!block) {
          tokens_.push_back({TokenKind::kBreak, {}});
        }
      }
    }
  }

  std::vector<std::string> blocks() const {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
      std::string block = finish_block(current);
      if (!block.empty()) out.push_back(std::move(block));
      current.clear();
    };
    std::size_t i = 0;
    while (i < tokens_.size()) {
      if (tokens_[i].kind == TokenKind::kText && !is_blank(tokens_[i].text)) {
        current += tokens_[i].text;
        ++i;
        continue;
      }
      // A run of separators resolves to one: a join wins over breaks, a
      // break wins over plain whitespace.
      bool join = false, brk = false;
      while (i < tokens_.size() &&
             !(tokens_[i].kind == TokenKind::kText && !is_blank(tokens_[i].text))) {
        join |= tokens_[i].kind == TokenKind::kJoin;
        brk |= tokens_[i].kind == TokenKind::kBreak;
        ++i;
      }
      if (brk && !join) {
        flush();
      } else {
        current.push_back(' ');
      }
    }
    flush();
    return out;
  }

 private:
  static const Node* next_significant(const std::vector<Node>& kids, std::size_t from) {
    for (std::size_t j = from; j < kids.size(); ++j) {
      if (kids[j].is_text() && is_blank(kids[j].text)) continue;
      return &kids[j];
    }
    return nullptr;
  }

  std::vector<Token> tokens_;
};

}  // namespace

std::string clean_html(std::string_view html_text) {
  Node root = html::parse(html_text);
  prune(root);
  Emitter emitter;
  emitter.element_children(root);
  std::string out;
  for (const auto& block : emitter.blocks()) {
    if (!out.empty()) out.push_back(' ');
    out += block;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Segmentation

std::unordered_set<std::string> parse_abbreviations(std::string_view text) {
  std::unordered_set<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.insert(line.substr(first, last - first + 1));
  }
  return out;
}

std::unordered_set<std::string> default_abbreviations() {
  return parse_abbreviations(detail::kBundledAbbreviations);
}

RuleSegmenter::RuleSegmenter() : abbreviations_(default_abbreviations()) {}

RuleSegmenter::RuleSegmenter(std::unordered_set<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {}

RuleSegmenter RuleSegmenter::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open abbreviation list " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return RuleSegmenter(parse_abbreviations(buffer.str()));
}

namespace {

bool is_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Letter-stop sequences such as "H.", "U.S." or "J.R.R.".
bool is_initials(std::string_view word) {
  if (word.size() < 2 || word.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < word.size(); i += 2) {
    if (!std::isalpha(static_cast<unsigned char>(word[i])) || word[i + 1] != '.') return false;
  }
  // Lower-case single letters ("a.") are ordinary words.
  return word.size() > 2 || is_upper(static_cast<unsigned char>(word[0]));
}

// Upper-case letter at `pos`: ASCII, Latin-1, Latin Extended-A, Greek or
// Cyrillic capitals.
bool upper_at(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) return false;
  const auto c0 = static_cast<unsigned char>(text[pos]);
  if (c0 < 0x80) return is_upper(c0);
  if ((c0 & 0xE0) != 0xC0 || pos + 1 >= text.size()) return false;
  const char32_t cp = (static_cast<char32_t>(c0 & 0x1F) << 6) |
                      (static_cast<unsigned char>(text[pos + 1]) & 0x3F);
  if (cp >= 0xC0 && cp <= 0xDE) return cp != 0xD7;
  if (cp >= 0x100 && cp <= 0x17F) return cp % 2 == 0;
  if (cp >= 0x391 && cp <= 0x3A9) return true;
  return cp >= 0x400 && cp <= 0x42F;
}

bool capital_or_digit_at(std::string_view text, std::size_t pos) {
  return upper_at(text, pos) || (pos < text.size() && is_digit(static_cast<unsigned char>(text[pos])));
}

bool opens_sentence(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) return false;
  if (capital_or_digit_at(text, pos)) return true;
  const char c = text[pos];
  if (c == '"' || c == '\'' || c == '(' || c == '[') return capital_or_digit_at(text, pos + 1);
  for (std::string_view q : {"“", "‘"}) {
    if (text.substr(pos).starts_with(q)) return capital_or_digit_at(text, pos + q.size());
  }
  return false;
}

void push_trimmed(SegmentList& out, std::string_view piece) {
  const auto first = piece.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return;
  const auto last = piece.find_last_not_of(" \t\r\n\f\v");
  out.segments.emplace_back(piece.substr(first, last - first + 1));
}

}  // namespace

bool RuleSegmenter::is_guarded(std::string_view word) const {
  while (!word.empty() && (word.front() == '(' || word.front() == '[' || word.front() == '"' ||
                           word.front() == '\'')) {
    word.remove_prefix(1);
  }
  if (abbreviations_.contains(std::string(word))) return true;
  return is_initials(word);
}

SegmentList RuleSegmenter::segment(std::string_view text) const {
  SegmentList out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    const std::size_t mark = i;
    std::size_t end = i + 1;
    while (end < text.size() && (text[end] == '.' || text[end] == '!' || text[end] == '?')) ++end;
    // Closing quotes and brackets stay with the sentence they close.
    for (;;) {
      if (end < text.size() && std::string_view("\"')]").find(text[end]) != std::string_view::npos) {
        ++end;
        continue;
      }
      bool matched = false;
      for (std::string_view q : {"”", "’"}) {
        if (text.substr(end).starts_with(q)) {
          end += q.size();
          matched = true;
        }
      }
      if (!matched) break;
    }
    std::size_t next = end;
    while (next < text.size() && is_space(static_cast<unsigned char>(text[next]))) ++next;
    const bool boundary = next > end && opens_sentence(text, next);
    if (boundary && c == '.' && end == mark + 1) {
      std::size_t word_start = mark;
      while (word_start > start && !is_space(static_cast<unsigned char>(text[word_start - 1]))) {
        --word_start;
      }
      if (is_guarded(text.substr(word_start, mark + 1 - word_start))) {
        i = end;
        continue;
      }
    }
    if (boundary) {
      push_trimmed(out, text.substr(start, end - start));
      start = next;
    }
    i = end;
  }
  if (start < text.size()) push_trimmed(out, text.substr(start));
  return out;
}

SegmentList segment(std::string_view text) {
  static const RuleSegmenter kDefault;
  return kDefault.segment(text);
}

// ---------------------------------------------------------------------------
// Windowing

void WindowConfig::check() const {
  require(!sizes.empty(), "window configuration needs at least one size");
  require(*sizes.begin() >= 1, "window sizes must be positive");
}

std::string join_segments(const SegmentList& s, std::size_t start, std::size_t n) {
  std::string out;
  for (std::size_t k = start; k < start + n; ++k) {
    if (k > start) out.push_back(' ');
    out += s.segments.at(k);
  }
  return out;
}

std::vector<Passage> window(const SegmentList& s, const WindowConfig& cfg) {
  cfg.check();
  std::vector<Passage> out;
  for (std::size_t n : cfg.sizes) {
    if (n > s.size()) continue;
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      out.push_back(Passage{join_segments(s, i, n), n, i});
    }
  }
  return out;
}

}  // namespace prove

#include "html_dom.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <unordered_map>
#include <unordered_set>

namespace prove::html {

std::string_view Node::attribute(const std::string& name) const {
  auto it = attributes.find(name);
  return it == attributes.end() ? std::string_view{} : std::string_view(it->second);
}

bool Node::has_class(std::string_view cls) const {
  std::string_view classes = attribute("class");
  std::size_t pos = 0;
  while (pos < classes.size()) {
    while (pos < classes.size() && std::isspace(static_cast<unsigned char>(classes[pos]))) ++pos;
    std::size_t end = pos;
    while (end < classes.size() && !std::isspace(static_cast<unsigned char>(classes[end]))) ++end;
    if (end > pos && classes.substr(pos, end - pos) == cls) return true;
    pos = end;
  }
  return false;
}

namespace {

void append_utf8(std::string& out, unsigned long cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

const std::unordered_map<std::string_view, unsigned long>& named_entities() {
  static const std::unordered_map<std::string_view, unsigned long> kEntities = {
      {"amp", '&'},       {"lt", '<'},        {"gt", '>'},        {"quot", '"'},
      {"apos", '\''},     {"nbsp", ' '},      {"ndash", 0x2013},  {"mdash", 0x2014},
      {"lsquo", 0x2018},  {"rsquo", 0x2019},  {"ldquo", 0x201C},  {"rdquo", 0x201D},
      {"hellip", 0x2026}, {"copy", 0xA9},     {"reg", 0xAE},      {"trade", 0x2122},
      {"middot", 0xB7},   {"bull", 0x2022},   {"laquo", 0xAB},    {"raquo", 0xBB},
      {"deg", 0xB0},      {"eacute", 0xE9},   {"egrave", 0xE8},   {"aacute", 0xE1},
      {"agrave", 0xE0},   {"oacute", 0xF3},   {"uacute", 0xFA},   {"iacute", 0xED},
      {"ntilde", 0xF1},   {"ccedil", 0xE7},   {"uuml", 0xFC},     {"ouml", 0xF6},
      {"auml", 0xE4},     {"szlig", 0xDF},    {"Eacute", 0xC9},   {"times", 0xD7},
      {"pound", 0xA3},    {"euro", 0x20AC},   {"sect", 0xA7},     {"para", 0xB6},
      {"thinsp", 0x2009}, {"ensp", 0x2002},   {"emsp", 0x2003},   {"shy", 0xAD},
  };
  return kEntities;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    const auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(text[i++]);
      continue;
    }
    std::string_view name = text.substr(i + 1, semi - i - 1);
    if (!name.empty() && name[0] == '#') {
      unsigned long cp = 0;
      const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      std::string_view digits = name.substr(hex ? 2 : 1);
      auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
        out.push_back(text[i++]);
        continue;
      }
      append_utf8(out, cp);
    } else {
      auto it = named_entities().find(name);
      if (it == named_entities().end()) {
        out.push_back(text[i++]);
        continue;
      }
      append_utf8(out, it->second);
    }
    i = semi + 1;
  }
  return out;
}

namespace {

const std::unordered_set<std::string_view> kVoidElements = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr"};

const std::unordered_set<std::string_view> kRawTextElements = {"script", "style", "textarea",
                                                               "title", "xmp"};

// Opening one of these closes an open <p>.
const std::unordered_set<std::string_view> kClosesParagraph = {
    "address", "article", "aside", "blockquote", "div", "dl", "fieldset", "footer", "form",
    "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "main", "nav", "ol", "p", "pre",
    "section", "table", "ul", "figure", "details"};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view html) : html_(html) { stack_.push_back(&root_); }

  Node run() {
    while (pos_ < html_.size()) {
      if (html_[pos_] == '<' && try_markup()) continue;
      read_text();
    }
    return std::move(root_);
  }

 private:
  Node& current() { return *stack_.back(); }

  void add_text(std::string_view raw, bool decode = true) {
    if (raw.empty()) return;
    std::string text = decode ? decode_entities(raw) : std::string(raw);
    auto& children = current().children;
    if (!children.empty() && children.back().is_text()) {
      children.back().text += text;
      return;
    }
    Node node;
    node.kind = Node::Kind::kText;
    node.text = std::move(text);
    children.push_back(std::move(node));
  }

  void read_text() {
    const std::size_t start = pos_;
    // A '<' that did not start markup is literal text.
    if (html_[pos_] == '<') ++pos_;
    while (pos_ < html_.size() && html_[pos_] != '<') ++pos_;
    add_text(html_.substr(start, pos_ - start));
  }

  bool try_markup() {
    std::string_view rest = html_.substr(pos_);
    if (rest.starts_with("<!--")) {
      const auto end = html_.find("-->", pos_ + 4);
      pos_ = end == std::string_view::npos ? html_.size() : end + 3;
      return true;
    }
    if (rest.starts_with("<![CDATA[")) {
      const auto end = html_.find("]]>", pos_ + 9);
      const auto stop = end == std::string_view::npos ? html_.size() : end;
      add_text(html_.substr(pos_ + 9, stop - pos_ - 9), false);
      pos_ = end == std::string_view::npos ? html_.size() : end + 3;
      return true;
    }
    if (rest.starts_with("<!") || rest.starts_with("<?")) {
      const auto end = html_.find('>', pos_);
      pos_ = end == std::string_view::npos ? html_.size() : end + 1;
      return true;
    }
    if (rest.size() >= 2 && rest[1] == '/') return end_tag();
    if (rest.size() >= 2 && std::isalpha(static_cast<unsigned char>(rest[1]))) return start_tag();
    return false;
  }

  bool end_tag() {
    std::size_t p = pos_ + 2;
    const std::size_t name_start = p;
    while (p < html_.size() && is_name_char(html_[p])) ++p;
    if (p == name_start) {
      // "</ >" and friends: skip to '>' like browsers do.
      const auto end = html_.find('>', pos_);
      pos_ = end == std::string_view::npos ? html_.size() : end + 1;
      return true;
    }
    const std::string name = lower(html_.substr(name_start, p - name_start));
    const auto end = html_.find('>', p);
    pos_ = end == std::string_view::npos ? html_.size() : end + 1;
    close(name);
    return true;
  }

  void close(const std::string& name) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag == name) {
        stack_.resize(i);
        return;
      }
    }
  }

  void close_implied(const std::string& name) {
    auto top_is = [&](std::initializer_list<std::string_view> tags) {
      const auto& t = current().tag;
      return std::find(tags.begin(), tags.end(), t) != tags.end();
    };
    if (kClosesParagraph.contains(name) && top_is({"p"})) stack_.pop_back();
    if (name == "li") close_within("li", {"ul", "ol", "menu"});
    if (name == "dt" || name == "dd") {
      close_within("dt", {"dl"});
      close_within("dd", {"dl"});
    }
    if (name == "td" || name == "th") {
      close_within("td", {"tr", "table"});
      close_within("th", {"tr", "table"});
    }
    if (name == "tr") close_within("tr", {"table", "tbody", "thead", "tfoot"});
    if (name == "option") close_within("option", {"select"});
  }

  // Closes the nearest open `tag` unless a `boundary` element is met first.
  void close_within(std::string_view tag, std::initializer_list<std::string_view> boundary) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const auto& t = stack_[i]->tag;
      if (t == tag) {
        stack_.resize(i);
        return;
      }
      if (std::find(boundary.begin(), boundary.end(), t) != boundary.end()) return;
    }
  }

  bool start_tag() {
    std::size_t p = pos_ + 1;
    const std::size_t name_start = p;
    while (p < html_.size() && is_name_char(html_[p])) ++p;
    Node node;
    node.tag = lower(html_.substr(name_start, p - name_start));
    bool self_closing = false;
    while (p < html_.size()) {
      while (p < html_.size() && std::isspace(static_cast<unsigned char>(html_[p]))) ++p;
      if (p >= html_.size()) break;
      if (html_[p] == '>') {
        ++p;
        break;
      }
      if (html_[p] == '/') {
        self_closing = true;
        ++p;
        continue;
      }
      const std::size_t attr_start = p;
      while (p < html_.size() && !std::isspace(static_cast<unsigned char>(html_[p])) &&
             html_[p] != '=' && html_[p] != '>' && html_[p] != '/') {
        ++p;
      }
      std::string attr = lower(html_.substr(attr_start, p - attr_start));
      if (attr.empty()) {
        ++p;
        continue;
      }
      while (p < html_.size() && std::isspace(static_cast<unsigned char>(html_[p]))) ++p;
      std::string value;
      if (p < html_.size() && html_[p] == '=') {
        ++p;
        while (p < html_.size() && std::isspace(static_cast<unsigned char>(html_[p]))) ++p;
        if (p < html_.size() && (html_[p] == '"' || html_[p] == '\'')) {
          const char quote = html_[p++];
          const auto end = html_.find(quote, p);
          const auto stop = end == std::string_view::npos ? html_.size() : end;
          value = decode_entities(html_.substr(p, stop - p));
          p = end == std::string_view::npos ? html_.size() : end + 1;
        } else {
          const std::size_t v = p;
          while (p < html_.size() && !std::isspace(static_cast<unsigned char>(html_[p])) &&
                 html_[p] != '>') {
            ++p;
          }
          value = decode_entities(html_.substr(v, p - v));
        }
      }
      node.attributes.emplace(std::move(attr), std::move(value));
    }
    pos_ = p;

    close_implied(node.tag);
    const std::string tag = node.tag;
    current().children.push_back(std::move(node));
    if (kVoidElements.contains(tag) || self_closing) return true;
    stack_.push_back(&current().children.back());

    if (kRawTextElements.contains(tag)) {
      // Raw text runs to the matching end tag, whatever it contains.
      const std::string closing = "</" + tag;
      std::size_t search = pos_;
      std::size_t end = std::string_view::npos;
      while (search < html_.size()) {
        const auto lt = html_.find("</", search);
        if (lt == std::string_view::npos) break;
        if (lower(html_.substr(lt, closing.size())) == closing) {
          end = lt;
          break;
        }
        search = lt + 2;
      }
      const auto stop = end == std::string_view::npos ? html_.size() : end;
      add_text(html_.substr(pos_, stop - pos_), tag == "title" || tag == "textarea");
      pos_ = stop;
      if (end == std::string_view::npos) stack_.pop_back();
    }
    return true;
  }

  std::string_view html_;
  std::size_t pos_ = 0;
  Node root_;
  // Pointers into the tree. Only the innermost open element ever gains
  // children, so parents' child vectors are stable while they are on the stack.
  std::vector<Node*> stack_;
};

}  // namespace

Node parse(std::string_view html) { return Parser(html).run(); }

std::string text_content(const Node& node) {
  if (node.is_text()) return node.text;
  std::string out;
  for (const auto& child : node.children) out += text_content(child);
  return out;
}

}  // namespace prove::html

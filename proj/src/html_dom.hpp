#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace prove::html {

struct Node {
  enum class Kind { kElement, kText };

  Kind kind = Kind::kElement;
  std::string tag;  // lower-case; empty for text and the document root
  std::map<std::string, std::string> attributes;
  std::string text;  // text nodes only, entities decoded
  std::vector<Node> children;

  bool is_element() const { return kind == Kind::kElement; }
  bool is_text() const { return kind == Kind::kText; }
  std::string_view attribute(const std::string& name) const;
  bool has_class(std::string_view cls) const;
};

// Lenient parser: never fails. Unknown or stray end tags are ignored, open
// elements are closed at end of input, and the usual implied end tags (p,
// li, td, tr, dt, dd, option) are applied.
Node parse(std::string_view html);

// Decodes named and numeric character references.
std::string decode_entities(std::string_view text);

// Concatenated text of all descendant text nodes.
std::string text_content(const Node& node);

}  // namespace prove::html

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lexzip::html {

/// One lexical unit of an HTML document. The tokenizer never fails: anything
/// it cannot make sense of is reported as text or silently dropped.
struct Token {
  enum class Kind { StartTag, EndTag, Text, Comment, Declaration };

  Kind kind = Kind::Text;
  std::string name;  // lowercase tag name for StartTag/EndTag
  std::vector<std::pair<std::string, std::string>> attributes;  // names lowercase, values entity-decoded
  std::string text;  // Text: raw character data; Comment/Declaration: body
  bool self_closing = false;
  bool raw = false;  // Text inside <script>/<style>: no markup, no entities

  /// Value of the first attribute named `attr`, if present.
  std::optional<std::string_view> attribute(std::string_view attr) const;
};

std::vector<Token> tokenize(std::string_view html);

/// Decodes character references (&amp; &#39; &#x27; and the common named set).
/// Unknown references are kept verbatim.
std::string decode_entities(std::string_view text);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

/// Tags that do not break words when stripped (phrasing content).
bool is_inline_tag(std::string_view name);

}  // namespace lexzip::html

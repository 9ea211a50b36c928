#include "lexzip/html_tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace lexzip::html {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

char to_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), to_lower);
  return out;
}

bool iequals_prefix(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (to_lower(text[pos + i]) != prefix[i]) return false;
  }
  return true;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

struct NamedEntity {
  std::string_view name;
  std::uint32_t code_point;
};

// Common named references; everything else must be numeric.
constexpr std::array<NamedEntity, 62> kEntities = {{
    {"aacute", 0xE1}, {"acirc", 0xE2},   {"amp", 0x26},    {"apos", 0x27},   {"auml", 0xE4},
    {"bull", 0x2022}, {"ccedil", 0xE7},  {"cent", 0xA2},   {"copy", 0xA9},   {"deg", 0xB0},
    {"divide", 0xF7}, {"eacute", 0xE9},  {"ecirc", 0xEA},  {"egrave", 0xE8}, {"euml", 0xEB},
    {"euro", 0x20AC}, {"gt", 0x3E},      {"hellip", 0x2026}, {"iacute", 0xED}, {"iexcl", 0xA1},
    {"iquest", 0xBF}, {"laquo", 0xAB},   {"ldquo", 0x201C}, {"lsaquo", 0x2039}, {"lsquo", 0x2018},
    {"lt", 0x3C},     {"mdash", 0x2014}, {"middot", 0xB7}, {"nbsp", 0xA0},   {"ndash", 0x2013},
    {"not", 0xAC},    {"ntilde", 0xF1},  {"oacute", 0xF3}, {"ocirc", 0xF4},  {"ouml", 0xF6},
    {"para", 0xB6},   {"plusmn", 0xB1},  {"pound", 0xA3},  {"quot", 0x22},   {"raquo", 0xBB},
    {"rdquo", 0x201D}, {"reg", 0xAE},    {"rsaquo", 0x203A}, {"rsquo", 0x2019}, {"sbquo", 0x201A},
    {"sect", 0xA7},   {"shy", 0xAD},     {"sup1", 0xB9},   {"sup2", 0xB2},   {"sup3", 0xB3},
    {"szlig", 0xDF},  {"thinsp", 0x2009}, {"times", 0xD7}, {"trade", 0x2122}, {"uacute", 0xFA},
    {"ucirc", 0xFB},  {"uuml", 0xFC},    {"yen", 0xA5},    {"zwj", 0x200D},  {"zwnj", 0x200C},
    {"ensp", 0x2002}, {"emsp", 0x2003},
}};

// Names that browsers also accept without a trailing semicolon. Returns the
// matched length and code point of the longest such prefix of `rest`.
std::optional<std::pair<std::size_t, std::uint32_t>> match_legacy_entity(std::string_view rest) {
  static constexpr std::pair<std::string_view, std::uint32_t> kLegacy[] = {
      {"amp", '&'},    {"AMP", '&'},    {"lt", '<'},     {"LT", '<'},     {"gt", '>'},
      {"GT", '>'},     {"quot", '"'},   {"QUOT", '"'},   {"nbsp", 0xA0},  {"copy", 0xA9},
      {"COPY", 0xA9},  {"reg", 0xAE},   {"REG", 0xAE},   {"shy", 0xAD},   {"deg", 0xB0},
      {"middot", 0xB7}, {"laquo", 0xAB}, {"raquo", 0xBB}, {"times", 0xD7}, {"eacute", 0xE9},
  };
  std::optional<std::pair<std::size_t, std::uint32_t>> best;
  for (const auto& [name, cp] : kLegacy) {
    if (rest.substr(0, name.size()) == name && (!best || name.size() > best->first)) best.emplace(name.size(), cp);
  }
  return best;
}

std::optional<std::uint32_t> lookup_entity(std::string_view name) {
  for (const auto& e : kEntities) {
    if (e.name == name) return e.code_point;
  }
  return std::nullopt;
}

// Parses an attribute list starting at `pos` (just after the tag name) up to
// and including the closing '>'. Returns the position after '>'.
std::size_t parse_attributes(std::string_view html, std::size_t pos, Token& token) {
  const std::size_t n = html.size();
  while (pos < n) {
    while (pos < n && (is_space(html[pos]) || html[pos] == '/')) {
      if (html[pos] == '/' && pos + 1 < n && html[pos + 1] == '>') token.self_closing = true;
      ++pos;
    }
    if (pos >= n) break;
    if (html[pos] == '>') return pos + 1;
    const std::size_t name_start = pos;
    while (pos < n && !is_space(html[pos]) && html[pos] != '=' && html[pos] != '>' &&
           !(html[pos] == '/' && pos + 1 < n && html[pos + 1] == '>')) {
      ++pos;
    }
    std::string name = lower(html.substr(name_start, pos - name_start));
    while (pos < n && is_space(html[pos])) ++pos;
    std::string value;
    if (pos < n && html[pos] == '=') {
      ++pos;
      while (pos < n && is_space(html[pos])) ++pos;
      if (pos < n && (html[pos] == '"' || html[pos] == '\'')) {
        const char quote = html[pos++];
        const auto close = html.find(quote, pos);
        const std::size_t end = close == std::string_view::npos ? n : close;
        value = decode_entities(html.substr(pos, end - pos));
        pos = close == std::string_view::npos ? n : close + 1;
      } else {
        const std::size_t vstart = pos;
        while (pos < n && !is_space(html[pos]) && html[pos] != '>') ++pos;
        value = decode_entities(html.substr(vstart, pos - vstart));
      }
    }
    if (!name.empty()) token.attributes.emplace_back(std::move(name), std::move(value));
  }
  return n;
}

}  // namespace

std::optional<std::string_view> Token::attribute(std::string_view attr) const {
  for (const auto& [k, v] : attributes) {
    if (k == attr) return std::string_view(v);
  }
  return std::nullopt;
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto amp = text.find('&', pos);
    if (amp == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, amp - pos));
    pos = amp;
    const auto semi = text.find(';', amp + 1);
    if (semi == std::string_view::npos || semi - amp > 32) {
      // Legacy references such as "&amp" decode without the semicolon.
      if (const auto legacy = match_legacy_entity(text.substr(amp + 1))) {
        append_utf8(out, legacy->second);
        pos = amp + 1 + legacy->first;
      } else {
        out += '&';
        ++pos;
      }
      continue;
    }
    const auto body = text.substr(amp + 1, semi - amp - 1);
    std::optional<std::uint32_t> cp;
    if (!body.empty() && body[0] == '#') {
      std::uint32_t value = 0;
      bool ok = body.size() > 1;
      const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
      for (std::size_t i = hex ? 2 : 1; ok && i < body.size(); ++i) {
        const char c = body[i];
        int digit;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        else { ok = false; break; }
        value = value * (hex ? 16 : 10) + static_cast<std::uint32_t>(digit);
        if (value > 0x10FFFF) value = 0x110000;
      }
      if (ok && body.size() > (hex ? 2u : 1u)) cp = value;
    } else {
      cp = lookup_entity(body);
    }
    if (cp) {
      append_utf8(out, *cp);
      pos = semi + 1;
    } else if (const auto legacy = match_legacy_entity(text.substr(amp + 1))) {
      append_utf8(out, legacy->second);
      pos = amp + 1 + legacy->first;
    } else {
      out += '&';
      ++pos;
    }
  }
  return out;
}

std::string sanitize_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t len = 0;
    std::uint32_t min_cp = 0;
    if (c < 0x80) {
      out += static_cast<char>(c);
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      min_cp = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      min_cp = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      min_cp = 0x10000;
    }
    bool valid = len != 0 && i + len <= n;
    std::uint32_t cp = len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) valid = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (valid && (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) valid = false;
    if (valid) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      out += "\xEF\xBF\xBD";
      ++i;
    }
  }
  return out;
}

bool is_inline_tag(std::string_view name) {
  static constexpr std::array<std::string_view, 26> kInline = {
      "a",    "abbr", "b",     "bdi",  "bdo", "big",  "cite", "code", "data",
      "dfn",  "em",   "font",  "i",    "kbd", "label", "mark", "q",   "s",
      "samp", "small", "span", "strong", "sub", "sup", "tt",  "u"};
  return std::find(kInline.begin(), kInline.end(), name) != kInline.end() || name == "var" || name == "time";
}

std::vector<Token> tokenize(std::string_view html) {
  std::vector<Token> tokens;
  const std::size_t n = html.size();
  std::size_t pos = 0;
  std::string pending_text;

  auto flush_text = [&] {
    if (!pending_text.empty()) {
      Token t;
      t.kind = Token::Kind::Text;
      t.text = std::move(pending_text);
      tokens.push_back(std::move(t));
      pending_text.clear();
    }
  };

  while (pos < n) {
    const auto lt = html.find('<', pos);
    if (lt == std::string_view::npos) {
      pending_text.append(html.substr(pos));
      break;
    }
    pending_text.append(html.substr(pos, lt - pos));
    pos = lt;

    if (html.substr(pos, 4) == "<!--") {
      flush_text();
      const auto end = html.find("-->", pos + 4);
      Token t;
      t.kind = Token::Kind::Comment;
      t.text = std::string(html.substr(pos + 4, (end == std::string_view::npos ? n : end) - pos - 4));
      tokens.push_back(std::move(t));
      pos = end == std::string_view::npos ? n : end + 3;
      continue;
    }
    if (pos + 1 < n && (html[pos + 1] == '!' || html[pos + 1] == '?')) {
      flush_text();
      const auto end = html.find('>', pos + 2);
      Token t;
      t.kind = Token::Kind::Declaration;
      t.text = std::string(html.substr(pos + 2, (end == std::string_view::npos ? n : end) - pos - 2));
      tokens.push_back(std::move(t));
      pos = end == std::string_view::npos ? n : end + 1;
      continue;
    }
    const bool closing = pos + 1 < n && html[pos + 1] == '/';
    const std::size_t name_start = pos + (closing ? 2 : 1);
    if (closing && name_start < n && !is_alpha(html[name_start])) {
      // "</" not followed by a letter is a bogus comment.
      flush_text();
      const auto end = html.find('>', name_start);
      Token t;
      t.kind = Token::Kind::Comment;
      t.text = std::string(html.substr(name_start, (end == std::string_view::npos ? n : end) - name_start));
      tokens.push_back(std::move(t));
      pos = end == std::string_view::npos ? n : end + 1;
      continue;
    }
    if (name_start >= n || !is_alpha(html[name_start])) {
      pending_text += '<';
      ++pos;
      continue;
    }
    flush_text();
    std::size_t name_end = name_start;
    while (name_end < n && !is_space(html[name_end]) && html[name_end] != '>' && html[name_end] != '/') ++name_end;

    Token tag;
    tag.name = lower(html.substr(name_start, name_end - name_start));
    if (closing) {
      tag.kind = Token::Kind::EndTag;
      const auto gt = html.find('>', name_end);
      pos = gt == std::string_view::npos ? n : gt + 1;
      tokens.push_back(std::move(tag));
      continue;
    }
    tag.kind = Token::Kind::StartTag;
    pos = parse_attributes(html, name_end, tag);
    const bool raw_text = (tag.name == "script" || tag.name == "style") && !tag.self_closing;
    const std::string raw_name = tag.name;
    tokens.push_back(std::move(tag));

    if (raw_text) {
      // Raw text runs to the matching end tag (case-insensitive) or EOF.
      const std::string closer = "</" + raw_name;
      std::size_t scan = pos;
      std::size_t end = n;
      while (scan < n) {
        const auto cand = html.find("</", scan);
        if (cand == std::string_view::npos) break;
        if (iequals_prefix(html, cand, closer)) {
          const std::size_t after = cand + closer.size();
          if (after >= n || is_space(html[after]) || html[after] == '>' || html[after] == '/') {
            end = cand;
            break;
          }
        }
        scan = cand + 2;
      }
      if (end > pos) {
        Token body;
        body.kind = Token::Kind::Text;
        body.raw = true;
        body.text = std::string(html.substr(pos, end - pos));
        tokens.push_back(std::move(body));
      }
      pos = end;
      if (end < n) {
        Token close;
        close.kind = Token::Kind::EndTag;
        close.name = raw_name;
        const auto gt = html.find('>', end);
        pos = gt == std::string_view::npos ? n : gt + 1;
        tokens.push_back(std::move(close));
      }
    }
  }
  flush_text();
  return tokens;
}

}  // namespace lexzip::html

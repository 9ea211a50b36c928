#include "lexzip/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "lexzip/error.hpp"
#include "lexzip/html_tokenizer.hpp"

namespace lexzip {
namespace detail {
extern const std::string_view kEnglishStopwordsData;
}

namespace {

std::set<std::string> parse_word_lines(std::istream& in) {
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    words.insert(line.substr(first, last - first + 1));
  }
  return words;
}

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::isalnum(u);
}

// Collapses ASCII whitespace and U+00A0 runs into single spaces and trims.
std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool nbsp = c == '\xC2' && i + 1 < text.size() && text[i + 1] == '\xA0';
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || nbsp) {
      pending_space = true;
      if (nbsp) ++i;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

// Decoded references such as "&lt;/" can reintroduce markup-looking
// sequences; a space after '<' keeps the output free of "</" and "<script".
std::string defuse_markup(std::string text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    out += text[i];
    if (text[i] != '<' || i + 1 >= text.size()) continue;
    const char next = text[i + 1];
    bool script = text.size() - (i + 1) >= 6;
    for (std::size_t k = 0; script && k < 6; ++k) {
      script = std::tolower(static_cast<unsigned char>(text[i + 1 + k])) == "script"[k];
    }
    if (next == '/' || script) out += ' ';
  }
  return out;
}

}  // namespace

StopwordList::StopwordList(std::set<std::string> words, std::string source_name)
    : source_name_(std::move(source_name)) {
  for (auto w : words) {
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    words_.insert(std::move(w));
  }
  if (words_.empty()) throw Error(ErrorCode::InvalidArgument, "stopword list is empty");
}

const StopwordList& StopwordList::english() {
  static const StopwordList list = [] {
    std::istringstream in{std::string(detail::kEnglishStopwordsData)};
    return StopwordList(parse_word_lines(in), "english-179");
  }();
  return list;
}

StopwordList StopwordList::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open stopword file " + path);
  return StopwordList(parse_word_lines(in), path);
}

std::string extract_text(std::string_view html) {
  const std::string clean = html::sanitize_utf8(html);
  const auto tokens = html::tokenize(clean);
  std::string text;
  text.reserve(clean.size() / 2);
  int hidden_depth = 0;  // open <noscript> elements
  for (const auto& token : tokens) {
    switch (token.kind) {
      case html::Token::Kind::Text:
        if (!token.raw && hidden_depth == 0) text += html::decode_entities(token.text);
        break;
      case html::Token::Kind::StartTag:
        if (token.name == "noscript" && !token.self_closing) ++hidden_depth;
        if (!html::is_inline_tag(token.name)) text += ' ';
        break;
      case html::Token::Kind::EndTag:
        if (token.name == "noscript" && hidden_depth > 0) --hidden_depth;
        if (!html::is_inline_tag(token.name)) text += ' ';
        break;
      case html::Token::Kind::Comment:
      case html::Token::Kind::Declaration:
        text += ' ';
        break;
    }
  }
  return defuse_markup(collapse_whitespace(text));
}

std::vector<std::string> tokenize(std::string_view text, const StopwordList& stopwords) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  const std::size_t n = text.size();
  while (pos < n) {
    while (pos < n && !is_word_byte(text[pos])) ++pos;
    const std::size_t start = pos;
    bool all_digits = true;
    while (pos < n && is_word_byte(text[pos])) {
      if (!std::isdigit(static_cast<unsigned char>(text[pos]))) all_digits = false;
      ++pos;
    }
    if (pos == start || all_digits) continue;
    std::string word(text.substr(start, pos - start));
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!stopwords.contains(word)) tokens.push_back(std::move(word));
  }
  return tokens;
}

TokenSequence preprocess(std::string doc_id, std::string_view html, const StopwordList& stopwords) {
  return TokenSequence{std::move(doc_id), tokenize(extract_text(html), stopwords)};
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace lexzip

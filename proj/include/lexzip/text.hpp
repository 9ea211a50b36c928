#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lexzip {

class StopwordList {
 public:
  /// Entries are lowercased; throws Error(InvalidArgument) on an empty set.
  StopwordList(std::set<std::string> words, std::string source_name);

  /// The bundled 179-word English list.
  static const StopwordList& english();

  /// One word per line; '#' starts a comment.
  static StopwordList from_file(const std::string& path);

  bool contains(std::string_view word) const { return words_.find(word) != words_.end(); }
  const std::set<std::string, std::less<>>& words() const { return words_; }
  const std::string& source_name() const { return source_name_; }

 private:
  std::set<std::string, std::less<>> words_;
  std::string source_name_;
};

struct TokenSequence {
  std::string doc_id;
  std::vector<std::string> tokens;
};

/// Visible text of an HTML page: script/style/noscript bodies and comments are
/// dropped, tags stripped, entities decoded and whitespace collapsed. Invalid
/// UTF-8 is replaced with U+FFFD.
std::string extract_text(std::string_view html);

/// Lowercases, splits on anything that is not an ASCII letter or digit and
/// drops empty, purely numeric and stopword tokens. Order and multiplicity are
/// preserved.
std::vector<std::string> tokenize(std::string_view text, const StopwordList& stopwords);

/// extract_text followed by tokenize.
TokenSequence preprocess(std::string doc_id, std::string_view html, const StopwordList& stopwords);

std::string join_tokens(std::span<const std::string> tokens);

}  // namespace lexzip

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lexzip/corpus.hpp"
#include "lexzip/error.hpp"
#include "lexzip/synth.hpp"

namespace lexzip::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Code of the lexzip::Error thrown by `fn`, or nullopt if it returns normally.
std::optional<ErrorCode> error_code_of(const std::function<void()>& fn);

std::filesystem::path data_file(const std::string& name);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

WebDocument make_doc(std::string id, Label label, std::string html,
                     std::string url = "https://site.example.com/index.html",
                     std::string fetched_at = "2019-03-01T00:00:00Z");

/// `count` distinct lowercase words that survive tokenization and stopword
/// removal, all starting with `prefix`.
std::vector<std::string> word_list(const std::string& prefix, std::size_t count);

/// Two classes over disjoint 50-word vocabularies.
SyntheticCorpusSpec disjoint_spec(std::size_t documents);

/// Two classes whose 500-word vocabularies share 150 words (30%). Shared
/// words sit in the head of one class and the tail of the other. Low
/// thresholds admit rare non-phishing words that also appear in the page
/// markup of both classes, and high thresholds leave too few words to
/// discriminate, so sweep accuracy peaks inside a wide grid.
SyntheticCorpusSpec overlap_spec(std::size_t documents);

}  // namespace lexzip::testing

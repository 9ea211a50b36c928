#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lexzip/label.hpp"
#include "lexzip/timestamp.hpp"

namespace lexzip {

enum class DocumentSource { Fetched, Imported, Synthetic };

std::string_view to_string(DocumentSource source);

/// One labeled web page. `html` holds the raw response body exactly as
/// received; classification compresses these bytes, so they are never
/// re-encoded.
struct WebDocument {
  std::string id;
  std::string url;
  Label label = Label::Unknown;
  std::string html;
  Timestamp fetched_at{};
  std::optional<std::string> target_brand;
  DocumentSource source = DocumentSource::Imported;
};

/// Throws Error(InvalidArgument) if the url is not absolute http(s) or the
/// body is empty.
void validate_document(const WebDocument& doc);

class Corpus {
 public:
  static constexpr int kManifestVersion = 1;

  Corpus() = default;
  /// Throws Error(InvalidArgument) on duplicate ids.
  explicit Corpus(std::vector<WebDocument> documents, int manifest_version = kManifestVersion);

  const std::vector<WebDocument>& documents() const { return documents_; }
  int manifest_version() const { return manifest_version_; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  /// Appends; throws on a duplicate id.
  void add(WebDocument doc);

  /// Documents whose label equals `label`, in corpus order.
  Corpus filter(Label label) const;

  std::size_t count(Label label) const;

  /// Stable content hash over ids, labels and HTML bytes (16 hex digits).
  std::string fingerprint() const;

 private:
  std::vector<WebDocument> documents_;
  std::unordered_set<std::string> ids_;
  int manifest_version_ = kManifestVersion;
};

/// Writes `dir/manifest.jsonl` (one record per document) and the raw HTML of
/// each document to `dir/html/<id>.html`. Existing outputs are overwritten.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Reads a corpus written by save_corpus (or any manifest with the same
/// layout; `path` is relative to the manifest directory).
Corpus load_corpus(const std::filesystem::path& dir);

/// train = documents fetched strictly before `cutoff`, test = the rest.
/// Throws Error(EmptySplit) if either side would be empty.
std::pair<Corpus, Corpus> temporal_split(const Corpus& corpus, Timestamp cutoff);

}  // namespace lexzip

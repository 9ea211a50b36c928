#include "lexzip/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lexzip/error.hpp"
#include "lexzip/rng.hpp"
#include "lexzip/url.hpp"

namespace lexzip {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestName = "manifest.jsonl";
constexpr const char* kCorpusMetaName = "corpus.json";

// Ids become file names; anything outside [A-Za-z0-9._-] is replaced.
std::string safe_file_stem(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out[0] == '.') out.insert(out.begin(), '_');
  return out;
}

std::string read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DocumentSource parse_source(const std::string& s) {
  if (s == "fetched") return DocumentSource::Fetched;
  if (s == "synthetic") return DocumentSource::Synthetic;
  return DocumentSource::Imported;
}

}  // namespace

std::string_view to_string(DocumentSource source) {
  switch (source) {
    case DocumentSource::Fetched: return "fetched";
    case DocumentSource::Imported: return "imported";
    case DocumentSource::Synthetic: return "synthetic";
  }
  return "imported";
}

void validate_document(const WebDocument& doc) {
  if (!is_absolute_http_url(doc.url)) {
    throw Error(ErrorCode::InvalidArgument, "document " + doc.id + " has a non-http(s) url: " + doc.url);
  }
  if (doc.html.empty()) throw Error(ErrorCode::InvalidArgument, "document " + doc.id + " has an empty body");
}

Corpus::Corpus(std::vector<WebDocument> documents, int manifest_version) : manifest_version_(manifest_version) {
  documents_.reserve(documents.size());
  for (auto& doc : documents) add(std::move(doc));
}

void Corpus::add(WebDocument doc) {
  if (!ids_.insert(doc.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate document id " + doc.id);
  documents_.push_back(std::move(doc));
}

Corpus Corpus::filter(Label label) const {
  Corpus out;
  out.manifest_version_ = manifest_version_;
  for (const auto& doc : documents_) {
    if (doc.label == label) out.add(doc);
  }
  return out;
}

std::size_t Corpus::count(Label label) const {
  std::size_t n = 0;
  for (const auto& doc : documents_) n += doc.label == label;
  return n;
}

std::string Corpus::fingerprint() const {
  Fnv1a h;
  for (const auto& doc : documents_) {
    h.update(doc.id);
    h.update("\x1f", 1);
    h.update(to_string(doc.label));
    h.update("\x1f", 1);
    const std::uint64_t size = doc.html.size();
    h.update(&size, sizeof size);
    h.update(doc.html);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  return buf;
}

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir / "html");
  std::ofstream manifest(dir / kManifestName, std::ios::binary | std::ios::trunc);
  if (!manifest) throw Error(ErrorCode::Io, "cannot write manifest in " + dir.string());
  std::set<std::string> used_stems;
  for (const auto& doc : corpus.documents()) {
    std::string stem = safe_file_stem(doc.id);
    for (int k = 1; !used_stems.insert(stem).second; ++k) stem = safe_file_stem(doc.id) + "~" + std::to_string(k);
    const std::string rel = "html/" + stem + ".html";
    std::ofstream out(dir / rel, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / rel).string());
    out.write(doc.html.data(), static_cast<std::streamsize>(doc.html.size()));

    json record = {
        {"id", doc.id},
        {"url", doc.url},
        {"label", to_string(doc.label)},
        {"fetched_at", format_timestamp(doc.fetched_at)},
        {"brand", doc.target_brand ? json(*doc.target_brand) : json(nullptr)},
        {"path", rel},
        {"source", to_string(doc.source)},
    };
    manifest << record.dump() << '\n';
  }
  std::ofstream meta(dir / kCorpusMetaName, std::ios::trunc);
  meta << json{{"manifest_version", corpus.manifest_version()}}.dump() << '\n';
}

Corpus load_corpus(const fs::path& dir) {
  std::ifstream manifest(dir / kManifestName);
  if (!manifest) throw Error(ErrorCode::Io, "no " + std::string(kManifestName) + " in " + dir.string());
  int version = Corpus::kManifestVersion;
  if (std::ifstream meta(dir / kCorpusMetaName); meta) {
    try {
      version = json::parse(meta).value("manifest_version", Corpus::kManifestVersion);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("corpus.json: ") + e.what());
    }
  }
  Corpus corpus({}, version);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json record = json::parse(line);
      WebDocument doc;
      doc.id = record.at("id").get<std::string>();
      doc.url = record.at("url").get<std::string>();
      const auto label = parse_label(record.value("label", std::string("unknown")));
      if (!label) throw Error(ErrorCode::Parse, "bad label");
      doc.label = *label;
      doc.fetched_at = parse_timestamp(record.at("fetched_at").get<std::string>());
      if (record.contains("brand") && !record["brand"].is_null()) doc.target_brand = record["brand"].get<std::string>();
      doc.source = parse_source(record.value("source", std::string("imported")));
      doc.html = read_file_bytes(dir / record.at("path").get<std::string>());
      corpus.add(std::move(doc));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

std::pair<Corpus, Corpus> temporal_split(const Corpus& corpus, Timestamp cutoff) {
  std::vector<WebDocument> train;
  std::vector<WebDocument> test;
  for (const auto& doc : corpus.documents()) {
    (doc.fetched_at < cutoff ? train : test).push_back(doc);
  }
  if (train.empty() || test.empty()) {
    throw Error(ErrorCode::EmptySplit, "cutoff " + format_timestamp(cutoff) + " leaves " +
                                           std::to_string(train.size()) + " train / " +
                                           std::to_string(test.size()) + " test documents");
  }
  return {Corpus(std::move(train), corpus.manifest_version()), Corpus(std::move(test), corpus.manifest_version())};
}

}  // namespace lexzip

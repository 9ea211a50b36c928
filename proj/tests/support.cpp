#include "support.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "lexzip/error.hpp"

namespace lexzip::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::uint64_t counter = 0;
  std::random_device rd;
  const auto base = fs::temp_directory_path();
  for (;;) {
    path_ = base / ("lexzip-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    if (fs::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path data_file(const std::string& name) { return fs::path(LEXZIP_TEST_DATA_DIR) / name; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

WebDocument make_doc(std::string id, Label label, std::string html, std::string url, std::string fetched_at) {
  WebDocument doc;
  doc.id = std::move(id);
  doc.label = label;
  doc.html = std::move(html);
  doc.url = std::move(url);
  doc.fetched_at = parse_timestamp(fetched_at);
  doc.source = DocumentSource::Synthetic;
  return doc;
}

std::vector<std::string> word_list(const std::string& prefix, std::size_t count) {
  static const char* kSyllables[] = {"ka", "lo", "mi", "nu", "pe", "ra", "si", "tu", "ve", "zo"};
  std::vector<std::string> words;
  words.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string w = prefix;
    std::size_t v = i;
    do {
      w += kSyllables[v % 10];
      v /= 10;
    } while (v > 0);
    words.push_back(std::move(w));
  }
  return words;
}

SyntheticCorpusSpec disjoint_spec(std::size_t documents) {
  SyntheticCorpusSpec spec;
  spec.documents = documents;
  spec.phishing.words = zipf_distribution(word_list("ph", 50), 1.0);
  spec.non_phishing.words = zipf_distribution(word_list("le", 50), 1.0);
  return spec;
}

SyntheticCorpusSpec overlap_spec(std::size_t documents) {
  const auto shared_a = word_list("sa", 75);
  const auto shared_b = word_list("sb", 75);
  const auto phish_only = word_list("ph", 350);
  // Rare non-phishing words that also occur in every page's markup. They
  // enter the non-phishing dictionary only at low thresholds, where they let
  // it compress the shared page skeleton better than the phishing dictionary.
  const std::vector<std::string> markup = {"doctype", "html", "head",      "meta",    "charset", "utf",
                                           "body",    "example", "com", "catalogue", "listing", "item"};
  auto legit_only = word_list("le", 350 - markup.size());
  legit_only.insert(legit_only.begin() + 225, markup.begin(), markup.end());

  auto ordered = [](const std::vector<std::string>& head, const std::vector<std::string>& body,
                    const std::vector<std::string>& tail) {
    std::vector<std::string> words = head;
    words.insert(words.end(), body.begin(), body.end());
    words.insert(words.end(), tail.begin(), tail.end());
    return words;
  };

  SyntheticCorpusSpec spec;
  spec.documents = documents;
  spec.min_tokens = 40;
  spec.max_tokens = 80;
  spec.phishing.words = zipf_distribution(ordered(shared_a, phish_only, shared_b), 1.0);
  spec.non_phishing.words = zipf_distribution(ordered(shared_b, legit_only, shared_a), 1.0);
  for (auto* traits : {&spec.phishing.traits, &spec.non_phishing.traits}) {
    traits->min_links = 2;
    traits->max_links = 4;
    traits->templated_links_rate = 1.0;
  }
  return spec;
}

std::optional<ErrorCode> error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace lexzip::testing

#include <doctest.h>

#include <json.hpp>
#include <random>
#include <set>

#include "lexzip/compressor.hpp"
#include "lexzip/dictionary.hpp"
#include "lexzip/error.hpp"
#include "lexzip/synth.hpp"
#include "support.hpp"

using namespace lexzip;
using testing::error_code_of;

namespace {

DictionaryModel dict_of(std::string bytes, std::string built_from = {}) {
  DictionaryModel d;
  d.dict_bytes = std::move(bytes);
  d.built_from = std::move(built_from);
  d.threshold = 1e-3;
  return d;
}

std::string from_hex(const std::string& hex) {
  std::string out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) out += static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16));
  return out;
}

std::string to_hex(std::string_view bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out += digits[c >> 4];
    out += digits[c & 15];
  }
  return out;
}

const nlohmann::json& goldens() {
  static const auto j = nlohmann::json::parse(testing::read_file(testing::data_file("zlib_goldens.json")));
  return j;
}

std::string golden_payload(const std::string& name) {
  const auto value = goldens()["payloads"][name].get<std::string>();
  if (value.rfind('@', 0) == 0) return testing::read_file(testing::data_file(value.substr(1)));
  return value;
}

std::string random_bytes(std::mt19937_64& gen, std::size_t n) {
  std::string s(n, '\0');
  for (auto& c : s) c = static_cast<char>(gen() & 0xFF);
  return s;
}

}  // namespace

TEST_SUITE("compressor") {

TEST_CASE("streams match the reference encoder byte for byte") {
  const auto& g = goldens();
  for (const auto& c : g["cases"]) {
    const auto payload = golden_payload(c["payload"]);
    const CompressionModel model(Label::Phishing, dict_of(g["dictionaries"][c["dictionary"].get<std::string>()]),
                                 c["level"].get<int>());
    const auto stream = compress_with_dictionary(payload, model);
    INFO(c["payload"].get<std::string>(), " / ", c["dictionary"].get<std::string>(), " / level ", c["level"].get<int>());
    CHECK(stream.size() == c["output_size"].get<std::size_t>());
    CHECK(to_hex(stream) == c["stream_hex"].get<std::string>());
  }
}

TEST_CASE("matching dictionaries compress the phrase payload better") {
  const auto& g = goldens();
  const auto payload = g["phrase_payload"].get<std::string>();
  REQUIRE(payload.size() == 10240);
  std::map<std::string, std::size_t> sizes;
  for (const auto& e : g["examples"]) {
    const std::string name = e["name"];
    const auto input = e["payload_hex"].is_null()
                           ? (name == "constant" ? std::string(10000, 'a') : payload)
                           : from_hex(e["payload_hex"].get<std::string>());
    const CompressionModel model(Label::Phishing, dict_of(e["dictionary"]));
    const auto outcome = compression_ratio(input, model);
    CHECK(outcome.input_size == e["input_size"].get<std::size_t>());
    CHECK(outcome.output_size == e["output_size"].get<std::size_t>());
    sizes[name] = outcome.output_size;
    if (name == "noise") CHECK(outcome.ratio <= 1.05);
    if (name == "constant") CHECK(outcome.ratio > 50);
  }
  CHECK(sizes.at("phrase_matching") < sizes.at("phrase_disjoint"));
}

TEST_CASE("ratio is input size over output size") {
  const CompressionModel model(Label::NonPhishing, dict_of("news shop"));
  const std::string payload = "<p>news of the shop</p>";
  const auto outcome = compression_ratio(payload, model);
  const auto stream = compress_with_dictionary(payload, model);
  CHECK(outcome.model_label == Label::NonPhishing);
  CHECK(outcome.input_size == payload.size());
  CHECK(outcome.output_size == stream.size());
  CHECK(outcome.ratio == static_cast<double>(payload.size()) / static_cast<double>(stream.size()));
  CHECK(error_code_of([&] { compression_ratio("", model); }) == ErrorCode::EmptyInput);
  CHECK(error_code_of([&] { compress_with_dictionary("", model); }) == ErrorCode::EmptyInput);
}

TEST_CASE("model construction validates its inputs") {
  CHECK(error_code_of([] { CompressionModel(Label::Phishing, dict_of("")); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { CompressionModel(Label::Phishing, dict_of("a"), 0); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { CompressionModel(Label::Phishing, dict_of("a"), 10); }) == ErrorCode::InvalidArgument);
  auto d = dict_of("a");
  d.class_label = Label::Phishing;
  CHECK(CompressionModel(d).class_label() == Label::Phishing);
  CHECK(CompressionModel(d).level() == 9);
}

TEST_CASE("compression round-trips arbitrary payloads") {
  std::mt19937_64 gen(5);
  const CompressionModel model(Label::Phishing, dict_of(goldens()["dictionaries"]["big"]));
  std::vector<std::size_t> sizes = {1, 2, 17, 1024, 4096, 65536};
  for (int i = 0; i < 30; ++i) sizes.push_back(1 + gen() % 65536);
  for (const auto n : sizes) {
    const auto payload = (n % 2) ? random_bytes(gen, n) : std::string(n, static_cast<char>('a' + n % 26));
    const auto stream = compress_with_dictionary(payload, model);
    CHECK(decompress_with_dictionary(stream, model.dictionary().dict_bytes) == payload);
    CHECK(compress_with_dictionary(payload, model) == stream);
  }
}

TEST_CASE("decompression rejects the wrong dictionary and corrupt streams") {
  const CompressionModel model(Label::Phishing, dict_of("verify account"));
  const auto stream = compress_with_dictionary("verify your account now", model);
  CHECK(error_code_of([&] { decompress_with_dictionary(stream, "other words"); }) == ErrorCode::Parse);
  CHECK(error_code_of([&] { decompress_with_dictionary(stream.substr(0, stream.size() / 2), "verify account"); }) ==
        ErrorCode::Parse);
}

TEST_CASE("payloads built from a dictionary's words favour that dictionary") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto own = testing::word_list("qa" + std::to_string(trial), 20 + gen() % 200);
    const auto other = testing::word_list("zo" + std::to_string(trial), 400);
    std::string d;
    for (const auto& w : own) d += (d.empty() ? "" : " ") + w;
    std::string e;
    for (std::size_t i = 0; e.size() < d.size(); ++i) e += (e.empty() ? "" : " ") + other[i % other.size()];
    e.resize(d.size());
    std::string payload;
    const std::size_t words = 1 + gen() % 2000;
    for (std::size_t i = 0; i < words; ++i) payload += own[gen() % own.size()] + " ";
    REQUIRE(payload.size() < 32768);
    const auto with_own = compression_ratio(payload, CompressionModel(Label::Phishing, dict_of(d)));
    const auto with_other = compression_ratio(payload, CompressionModel(Label::NonPhishing, dict_of(e)));
    CHECK(with_own.output_size <= with_other.output_size);
  }
}

TEST_CASE("decide picks the strictly higher ratio") {
  CompressionOutcome phish{Label::Phishing, 100, 20, 5.0};
  CompressionOutcome legit{Label::NonPhishing, 100, 24, 4.2};
  const auto r = decide("a", phish, legit);
  CHECK(r.predicted == Label::Phishing);
  CHECK_FALSE(r.tie);
  CHECK(decide("b", legit, phish).predicted == Label::NonPhishing);
  const auto tie = decide("c", phish, phish);
  CHECK(tie.predicted == Label::NonPhishing);
  CHECK(tie.tie);
}

TEST_CASE("classify refuses models from different corpora") {
  const auto doc = testing::make_doc("x", Label::Unknown, "<p>verify</p>");
  const CompressionModel p(Label::Phishing, dict_of("verify", "aaaa"));
  const CompressionModel l(Label::NonPhishing, dict_of("news", "bbbb"));
  const CompressionModel l_same(Label::NonPhishing, dict_of("news", "aaaa"));
  CHECK(error_code_of([&] { classify(doc, p, l); }) == ErrorCode::ModelMismatch);
  CHECK_NOTHROW(classify(doc, p, l_same));
  auto empty = doc;
  empty.html.clear();
  CHECK(error_code_of([&] { classify(empty, p, l_same); }) == ErrorCode::EmptyInput);
}

TEST_CASE("end-to-end classification on synthetic corpora") {
  const auto train = generate_synthetic_corpus(testing::disjoint_spec(200), 21);
  const auto test = generate_synthetic_corpus(testing::disjoint_spec(100), 22);
  const auto tables = analyze_corpus(train);
  const CompressionModel phish(build_dictionary(tables.phishing, 1e-3, {}, tables.fingerprint));
  const CompressionModel legit(build_dictionary(tables.non_phishing, 1e-3, {}, tables.fingerprint));
  CHECK(phish.class_label() == Label::Phishing);
  CHECK(legit.class_label() == Label::NonPhishing);

  // A page made only of phishing-dictionary words.
  std::string page = "<html><body><p>";
  for (const auto& w : phish.dictionary().words) page += w.word + " ";
  page += "</p></body></html>";
  CHECK(classify(testing::make_doc("p", Label::Unknown, page), phish, legit).predicted == Label::Phishing);

  const auto results = classify_batch(test, phish, legit);
  REQUIRE(results.size() == 100);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    CHECK(results[i].doc_id == test.documents()[i].id);
    REQUIRE(results[i].result);
    const auto& r = *results[i].result;
    // Ratio comparison agrees with comparing sizes in reverse.
    const bool smaller = r.phishing_outcome.output_size < r.nonphishing_outcome.output_size;
    CHECK(smaller == (r.predicted == Label::Phishing));
    correct += r.predicted == test.documents()[i].label;
  }
  CHECK(static_cast<double>(correct) / 100.0 >= 0.95);

  const auto again = classify_batch(test, phish, legit, 3);
  CHECK(classification_jsonl(again) == classification_jsonl(results));
  CHECK(classify_batch(Corpus{}, phish, legit).empty());
}

TEST_CASE("batch records per-document failures and emits JSON Lines") {
  Corpus corpus;
  corpus.add(testing::make_doc("ok", Label::Unknown, "<p>verify account</p>"));
  corpus.add(testing::make_doc("empty", Label::Unknown, ""));
  const CompressionModel p(Label::Phishing, dict_of("verify account"));
  const CompressionModel l(Label::NonPhishing, dict_of("news today"));
  const auto entries = classify_batch(corpus, p, l);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].result);
  CHECK_FALSE(entries[1].result);
  CHECK_FALSE(entries[1].error.empty());

  const auto text = classification_jsonl(entries);
  std::vector<nlohmann::json> lines;
  std::size_t start = 0;
  for (auto nl = text.find('\n'); nl != std::string::npos; start = nl + 1, nl = text.find('\n', start)) {
    lines.push_back(nlohmann::json::parse(text.substr(start, nl - start)));
  }
  REQUIRE(lines.size() == 2);
  CHECK(lines[0]["doc_id"] == "ok");
  CHECK(lines[0]["predicted"] == to_string(entries[0].result->predicted));
  CHECK(lines[0]["phish_ratio"].get<double>() == entries[0].result->phishing_outcome.ratio);
  CHECK(lines[0]["legit_ratio"].get<double>() == entries[0].result->nonphishing_outcome.ratio);
  CHECK(lines[0]["tie"].is_boolean());
  CHECK(lines[1]["doc_id"] == "empty");
  CHECK(lines[1].contains("error"));
}

}  // TEST_SUITE

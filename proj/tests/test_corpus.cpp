#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "lexzip/corpus.hpp"
#include "lexzip/error.hpp"
#include "lexzip/synth.hpp"
#include "lexzip/text.hpp"
#include "lexzip/timestamp.hpp"
#include "lexzip/url.hpp"
#include "support.hpp"

using namespace lexzip;
using testing::make_doc;
using testing::error_code_of;

TEST_SUITE("corpus") {

TEST_CASE("timestamps round-trip through ISO-8601") {
  const auto t = parse_timestamp("2019-05-01T12:30:05Z");
  CHECK(format_timestamp(t) == "2019-05-01T12:30:05Z");
  CHECK(parse_timestamp("2019-05-01") == parse_timestamp("2019-05-01T00:00:00Z"));
  CHECK(parse_timestamp("2019-05-01T14:30:05+02:00") == parse_timestamp("2019-05-01T12:30:05Z"));
  CHECK(parse_timestamp("2019-05-01T12:30:05.250Z") == t);
  CHECK_THROWS_AS(parse_timestamp("May 1st"), Error);
  CHECK_THROWS_AS(parse_timestamp("2019-02-30"), Error);
}

TEST_CASE("corpus rejects duplicate ids") {
  Corpus c;
  c.add(make_doc("a", Label::Phishing, "<p>x</p>"));
  CHECK(error_code_of([&] { c.add(make_doc("a", Label::NonPhishing, "<p>y</p>")); }) == ErrorCode::InvalidArgument);
  CHECK(c.size() == 1);
  CHECK_THROWS_AS(Corpus({make_doc("b", Label::Phishing, "x"), make_doc("b", Label::Phishing, "y")}), Error);
}

TEST_CASE("document validation requires an http url and a body") {
  CHECK_NOTHROW(validate_document(make_doc("a", Label::Phishing, "<p>x</p>")));
  CHECK_THROWS_AS(validate_document(make_doc("b", Label::NonPhishing, "")), Error);
  CHECK_THROWS_AS(validate_document(make_doc("c", Label::NonPhishing, "x", "ftp://a.example/")), Error);
  CHECK_THROWS_AS(validate_document(make_doc("d", Label::NonPhishing, "x", "index.html")), Error);
}

TEST_CASE("corpus round-trips through its directory layout byte-exactly") {
  testing::TempDir dir;
  Corpus c;
  std::string binary = "<p>caf\xC3\xA9</p>\r\n\x00\xFF tail";
  binary.push_back('\0');
  auto d1 = make_doc("doc/1", Label::Phishing, binary, "http://evil.example/login?x=1", "2019-01-05T10:00:00Z");
  d1.target_brand = "paypal";
  d1.source = DocumentSource::Fetched;
  c.add(d1);
  c.add(make_doc("doc 2", Label::NonPhishing, "<html></html>", "https://news.example.org/", "2019-05-05T00:00:00Z"));
  c.add(make_doc("doc3", Label::Unknown, "plain", "https://x.example/", "2019-05-06T00:00:00Z"));
  save_corpus(c, dir.path());
  const auto loaded = load_corpus(dir.path());
  REQUIRE(loaded.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = c.documents()[i];
    const auto& b = loaded.documents()[i];
    CHECK(a.id == b.id);
    CHECK(a.url == b.url);
    CHECK(a.label == b.label);
    CHECK(a.html == b.html);
    CHECK(a.fetched_at == b.fetched_at);
    CHECK(a.target_brand == b.target_brand);
    CHECK(a.source == b.source);
  }
  CHECK(loaded.fingerprint() == c.fingerprint());

  // The manifest is plain JSON Lines with the documented fields.
  const auto manifest = testing::read_file(dir / "manifest.jsonl");
  CHECK(manifest.find("\"fetched_at\":\"2019-01-05T10:00:00Z\"") != std::string::npos);
  CHECK(manifest.find("\"brand\":\"paypal\"") != std::string::npos);
  CHECK(manifest.find("\"brand\":null") != std::string::npos);
  CHECK(manifest.find("\"path\":\"html/") != std::string::npos);

  // Saving again overwrites rather than appends.
  save_corpus(c, dir.path());
  CHECK(load_corpus(dir.path()).size() == 3);
}

TEST_CASE("loading a missing corpus fails with Io") {
  testing::TempDir dir;
  CHECK(error_code_of([&] { load_corpus(dir / "nope"); }) == ErrorCode::Io);
}

TEST_CASE("fingerprint changes with content") {
  Corpus a({make_doc("x", Label::Phishing, "<p>a</p>")});
  Corpus b({make_doc("x", Label::Phishing, "<p>b</p>")});
  Corpus c({make_doc("x", Label::NonPhishing, "<p>a</p>")});
  CHECK(a.fingerprint() != b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
  CHECK(a.fingerprint() == Corpus({make_doc("x", Label::Phishing, "<p>a</p>")}).fingerprint());
  CHECK(a.fingerprint().size() == 16);
}

TEST_CASE("temporal_split partitions by the cutoff") {
  Corpus c;
  for (int i = 0; i < 10; ++i) {
    const std::string month = i < 8 ? "2019-0" + std::to_string(1 + i % 4) : "2019-05";
    c.add(make_doc("d" + std::to_string(i), i % 2 ? Label::Phishing : Label::NonPhishing, "<p>x</p>",
                   "https://a.example/", month + "-10T00:00:00Z"));
  }
  const auto cutoff = parse_timestamp("2019-05-01");
  const auto [train, test] = temporal_split(c, cutoff);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  std::set<std::string> ids;
  for (const auto& d : train.documents()) {
    CHECK(d.fetched_at < cutoff);
    ids.insert(d.id);
  }
  for (const auto& d : test.documents()) {
    CHECK(d.fetched_at >= cutoff);
    CHECK(ids.insert(d.id).second);
  }
  CHECK(ids.size() == c.size());
  CHECK(error_code_of([&] { temporal_split(c, parse_timestamp("2018-01-01")); }) == ErrorCode::EmptySplit);
  CHECK(error_code_of([&] { temporal_split(c, parse_timestamp("2020-01-01")); }) == ErrorCode::EmptySplit);
}

TEST_CASE("synthetic corpus is labeled, balanced and reproducible") {
  auto spec = testing::disjoint_spec(200);
  const auto a = generate_synthetic_corpus(spec, 7);
  const auto b = generate_synthetic_corpus(spec, 7);
  const auto other = generate_synthetic_corpus(spec, 8);
  CHECK(a.count(Label::Phishing) == 100);
  CHECK(a.count(Label::NonPhishing) == 100);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.documents()[i].html == b.documents()[i].html);
    CHECK(a.documents()[i].fetched_at == b.documents()[i].fetched_at);
  }
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != other.fingerprint());
  for (const auto& d : a.documents()) {
    CHECK(d.source == DocumentSource::Synthetic);
    CHECK(d.fetched_at >= spec.start);
    CHECK(d.fetched_at <= spec.end);
    const auto tokens = tokenize(extract_text(d.html), StopwordList::english());
    CHECK(tokens.size() >= spec.min_tokens);
    CHECK(tokens.size() <= spec.max_tokens);
    const std::string prefix = d.label == Label::Phishing ? "ph" : "le";
    for (const auto& t : tokens) CHECK(t.rfind(prefix, 0) == 0);
  }
}

TEST_CASE("invalid distributions are rejected") {
  WordDistribution d{{"a", "b"}, {0.5, 0.4}};
  CHECK(error_code_of([&] { validate_distribution(d); }) == ErrorCode::InvalidDistribution);
  d.probabilities = {1.2, -0.2};
  CHECK(error_code_of([&] { validate_distribution(d); }) == ErrorCode::InvalidDistribution);
  d.probabilities = {1.0};
  CHECK(error_code_of([&] { validate_distribution(d); }) == ErrorCode::InvalidDistribution);
  d.probabilities = {0.5, 0.5 + 1e-12};
  CHECK_NOTHROW(validate_distribution(d));

  auto spec = testing::disjoint_spec(10);
  spec.phishing.words.probabilities[0] -= 0.1;
  CHECK(error_code_of([&] { generate_synthetic_corpus(spec, 1); }) == ErrorCode::InvalidDistribution);
}

TEST_CASE("sampled word frequencies match the distribution within 3 standard errors") {
  SyntheticCorpusSpec spec;
  spec.documents = 100;
  spec.phishing_fraction = 1.0;
  spec.min_tokens = 100;
  spec.max_tokens = 100;
  const auto words = testing::word_list("w", 5);
  spec.phishing.words = {words, {0.4, 0.25, 0.2, 0.1, 0.05}};
  spec.non_phishing.words = spec.phishing.words;
  const auto corpus = generate_synthetic_corpus(spec, 2024);
  std::map<std::string, double> counts;
  double total = 0;
  for (const auto& d : corpus.documents()) {
    for (const auto& t : tokenize(extract_text(d.html), StopwordList::english())) {
      counts[t] += 1;
      total += 1;
    }
  }
  REQUIRE(total == 10000);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const double p = spec.phishing.words.probabilities[i];
    const double se = std::sqrt(p * (1 - p) / total);
    INFO(words[i]);
    CHECK(std::abs(counts[words[i]] / total - p) <= 3 * se);
  }
}

TEST_CASE("synthetic spec parses from JSON") {
  const auto spec = parse_synthetic_spec(R"({
    "documents": 20, "phishing_fraction": 0.25, "tokens_per_document": {"min": 5, "max": 9},
    "classes": {
      "phishing": {"words": ["alpha", "beta"], "probabilities": [0.5, 0.5], "traits": {"https_rate": 1.0}},
      "non_phishing": {"words": ["gamma", "delta", "omega"], "zipf": 1.2}
    }
  })");
  CHECK(spec.documents == 20);
  CHECK(spec.min_tokens == 5);
  CHECK(spec.max_tokens == 9);
  CHECK(spec.phishing.traits.https_rate == 1.0);
  CHECK(spec.non_phishing.words.words.size() == 3);
  const auto corpus = generate_synthetic_corpus(spec, 3);
  CHECK(corpus.count(Label::Phishing) == 5);
  const auto phishing = corpus.filter(Label::Phishing);
  for (const auto& d : phishing.documents()) CHECK(d.url.rfind("https://", 0) == 0);
  CHECK_THROWS_AS(parse_synthetic_spec("{\"documents\": 3}"), Error);
}

TEST_CASE("url parsing and resolution") {
  const auto u = parse_url("HTTPS://Login.Example.COM:8443/a/./b/../c?q=1#frag");
  REQUIRE(u);
  CHECK(u->scheme == "https");
  CHECK(u->host == "login.example.com");
  CHECK(u->port == "8443");
  CHECK(u->path == "/a/c");
  CHECK(u->query == "q=1");
  CHECK(u->fragment == "frag");
  CHECK_FALSE(parse_url("login.php"));
  CHECK_FALSE(parse_url("http://exa mple.com/"));
  CHECK(is_absolute_http_url("http://a.example"));
  CHECK_FALSE(is_absolute_http_url("mailto:a@b.example"));

  const auto base = *parse_url("https://shop.example.co.uk/store/item/view.html");
  CHECK(resolve_url(base, "../cart")->to_string() == "https://shop.example.co.uk/store/cart");
  CHECK(resolve_url(base, "/login")->to_string() == "https://shop.example.co.uk/login");
  CHECK(resolve_url(base, "//cdn.example.net/x.js")->to_string() == "https://cdn.example.net/x.js");
  CHECK(resolve_url(base, "?page=2")->to_string() == "https://shop.example.co.uk/store/item/view.html?page=2");
  CHECK(resolve_url(base, "http://other.example/")->host == "other.example");
}

TEST_CASE("registrable domains honour multi-label suffixes") {
  CHECK(registrable_domain("www.paypal.com") == "paypal.com");
  CHECK(registrable_domain("a.b.shop.example.co.uk") == "example.co.uk");
  CHECK(registrable_domain("login.bank.com.au") == "bank.com.au");
  CHECK(registrable_domain("example.com") == "example.com");
  CHECK(registrable_domain("localhost") == "localhost");
  CHECK(registrable_domain("192.168.0.1") == "192.168.0.1");
  CHECK(registrable_domain("co.uk") == "co.uk");
}

}  // TEST_SUITE

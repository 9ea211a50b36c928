#include "lexzip/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lexzip/error.hpp"
#include "lexzip/rng.hpp"

namespace lexzip {
namespace {

using nlohmann::json;

class WordSampler {
 public:
  explicit WordSampler(const WordDistribution& dist) : words_(&dist.words) {
    cumulative_.reserve(dist.probabilities.size());
    double acc = 0.0;
    for (double p : dist.probabilities) {
      acc += p;
      cumulative_.push_back(acc);
    }
  }

  const std::string& sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return (*words_)[static_cast<std::size_t>(it - cumulative_.begin())];
  }

 private:
  const std::vector<std::string>* words_;
  std::vector<double> cumulative_;
};

std::string make_html(const std::vector<std::string>& tokens, const PageTraits& traits, bool https,
                      const std::string& host, Rng& rng) {
  std::string html = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"></head>\n<body>\n";
  for (std::size_t i = 0; i < tokens.size(); i += 12) {
    html += "<p>";
    for (std::size_t k = i; k < std::min(tokens.size(), i + 12); ++k) {
      if (k > i) html += ' ';
      html += tokens[k];
    }
    html += "</p>\n";
  }
  if (traits.login_form_rate > 0 && rng.uniform() < traits.login_form_rate) {
    const bool offsite = rng.uniform() < traits.offsite_action_rate;
    const std::string action = offsite ? "http://collector.invalid/post.php" : std::string(https ? "https" : "http") + "://" + host + "/session";
    html += "<form method=\"post\" action=\"" + action +
            "\"><input type=\"text\" name=\"user\"><input type=\"password\" name=\"password\">"
            "<input type=\"submit\"></form>\n";
  }
  if (traits.max_links > 0) {
    const std::size_t span = traits.max_links - std::min(traits.min_links, traits.max_links);
    const std::size_t links = traits.min_links + static_cast<std::size_t>(rng.below(span + 1));
    const bool templated = rng.uniform() < traits.templated_links_rate;
    const std::string base = std::string(https ? "https" : "http") + "://" + host;
    for (std::size_t k = 0; k < links; ++k) {
      std::string href;
      if (rng.uniform() < traits.empty_link_rate) {
        href = "#";
      } else if (templated) {
        href = base + "/catalogue/listing/item" + std::to_string(k % 10);
      } else {
        href = base + "/s" + std::to_string(rng.below(1000000)) + "/" + tokens[rng.below(tokens.size())];
      }
      html += "<a href=\"" + href + "\"></a>\n";
    }
  }
  html += "</body></html>\n";
  return html;
}

WordDistribution parse_distribution(const json& j) {
  WordDistribution dist;
  dist.words = j.at("words").get<std::vector<std::string>>();
  if (j.contains("probabilities")) {
    dist.probabilities = j.at("probabilities").get<std::vector<double>>();
  } else if (j.contains("zipf")) {
    dist = zipf_distribution(std::move(dist.words), j.at("zipf").get<double>());
  } else {
    throw Error(ErrorCode::InvalidDistribution, "class needs 'probabilities' or 'zipf'");
  }
  return dist;
}

PageTraits parse_traits(const json& j) {
  PageTraits t;
  t.https_rate = j.value("https_rate", t.https_rate);
  t.login_form_rate = j.value("login_form_rate", t.login_form_rate);
  t.offsite_action_rate = j.value("offsite_action_rate", t.offsite_action_rate);
  t.min_links = j.value("min_links", t.min_links);
  t.max_links = j.value("max_links", t.max_links);
  t.empty_link_rate = j.value("empty_link_rate", t.empty_link_rate);
  t.templated_links_rate = j.value("templated_links_rate", t.templated_links_rate);
  return t;
}

}  // namespace

void validate_distribution(const WordDistribution& dist) {
  if (dist.words.empty() || dist.words.size() != dist.probabilities.size()) {
    throw Error(ErrorCode::InvalidDistribution, "need one probability per word and at least one word");
  }
  double sum = 0.0;
  for (double p : dist.probabilities) {
    if (!std::isfinite(p) || p < 0.0) throw Error(ErrorCode::InvalidDistribution, "probabilities must be finite and >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidDistribution, "probabilities sum to " + std::to_string(sum));
  }
}

WordDistribution zipf_distribution(std::vector<std::string> words, double exponent) {
  WordDistribution dist;
  dist.probabilities.resize(words.size());
  double norm = 0.0;
  for (std::size_t r = 0; r < words.size(); ++r) {
    dist.probabilities[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    norm += dist.probabilities[r];
  }
  for (auto& p : dist.probabilities) p /= norm;
  dist.words = std::move(words);
  return dist;
}

Corpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec, std::uint64_t seed) {
  validate_distribution(spec.phishing.words);
  validate_distribution(spec.non_phishing.words);
  if (spec.min_tokens == 0 || spec.max_tokens < spec.min_tokens) {
    throw Error(ErrorCode::InvalidArgument, "token range must satisfy 1 <= min <= max");
  }
  if (spec.end < spec.start) throw Error(ErrorCode::InvalidArgument, "end precedes start");
  if (!(spec.phishing_fraction >= 0.0 && spec.phishing_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "phishing_fraction must be in [0, 1]");
  }

  const auto n_phish = static_cast<std::size_t>(std::llround(static_cast<double>(spec.documents) * spec.phishing_fraction));
  std::vector<Label> labels(spec.documents, Label::NonPhishing);
  std::fill_n(labels.begin(), n_phish, Label::Phishing);
  Rng order_rng(derive_seed(seed, 0xffffffffULL));
  order_rng.shuffle(labels);

  const WordSampler phish_sampler(spec.phishing.words);
  const WordSampler legit_sampler(spec.non_phishing.words);
  const auto span_seconds = (spec.end - spec.start).count();

  std::vector<WebDocument> docs;
  docs.reserve(spec.documents);
  for (std::size_t i = 0; i < spec.documents; ++i) {
    Rng rng(derive_seed(seed, i));
    const bool phishing = labels[i] == Label::Phishing;
    const ClassProfile& profile = phishing ? spec.phishing : spec.non_phishing;
    const WordSampler& sampler = phishing ? phish_sampler : legit_sampler;

    const std::size_t n_tokens =
        spec.min_tokens + static_cast<std::size_t>(rng.below(spec.max_tokens - spec.min_tokens + 1));
    std::vector<std::string> tokens;
    tokens.reserve(n_tokens);
    for (std::size_t k = 0; k < n_tokens; ++k) tokens.push_back(sampler.sample(rng));

    const bool https = rng.uniform() < profile.traits.https_rate;
    char id[64];
    std::snprintf(id, sizeof id, "%s-%06zu", spec.id_prefix.c_str(), i);
    const std::string host = "site" + std::to_string(i) + ".example.com";

    WebDocument doc;
    doc.id = id;
    doc.url = std::string(https ? "https" : "http") + "://" + host + "/index.html";
    doc.label = labels[i];
    doc.fetched_at = spec.start + std::chrono::seconds(span_seconds > 0 ? static_cast<long long>(rng.below(
                                                                               static_cast<std::uint64_t>(span_seconds) + 1))
                                                                         : 0);
    doc.source = DocumentSource::Synthetic;
    doc.html = make_html(tokens, profile.traits, https, host, rng);
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

SyntheticCorpusSpec parse_synthetic_spec(std::string_view json_text) {
  try {
    const json j = json::parse(json_text);
    SyntheticCorpusSpec spec;
    spec.documents = j.value("documents", spec.documents);
    spec.phishing_fraction = j.value("phishing_fraction", spec.phishing_fraction);
    if (j.contains("tokens_per_document")) {
      const auto& t = j["tokens_per_document"];
      spec.min_tokens = t.at("min").get<std::size_t>();
      spec.max_tokens = t.at("max").get<std::size_t>();
    }
    if (j.contains("start")) spec.start = parse_timestamp(j["start"].get<std::string>());
    if (j.contains("end")) spec.end = parse_timestamp(j["end"].get<std::string>());
    spec.id_prefix = j.value("id_prefix", spec.id_prefix);
    const auto& classes = j.at("classes");
    spec.phishing.words = parse_distribution(classes.at("phishing"));
    spec.non_phishing.words = parse_distribution(classes.at("non_phishing"));
    if (classes["phishing"].contains("traits")) spec.phishing.traits = parse_traits(classes["phishing"]["traits"]);
    if (classes["non_phishing"].contains("traits")) {
      spec.non_phishing.traits = parse_traits(classes["non_phishing"]["traits"]);
    }
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("synthetic spec: ") + e.what());
  }
}

SyntheticCorpusSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_synthetic_spec(ss.str());
}

}  // namespace lexzip

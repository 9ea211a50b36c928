#include "lexzip/html_features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lexzip/error.hpp"
#include "lexzip/html_tokenizer.hpp"
#include "lexzip/url.hpp"

namespace lexzip {
namespace {

struct FormScope {
  std::optional<std::string> action;
  bool has_input = false;
  bool has_image = false;
  std::string visible_text;
  std::string control_text;  // descriptive attributes of form controls
};

struct PageStructure {
  std::vector<FormScope> forms;
  std::vector<std::string> hrefs;
};

// Lowercase words joined by single spaces, padded on both sides.
std::string normalize_words(std::string_view text) {
  std::string out = " ";
  bool gap = false;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::isalnum(u)) {
      if (gap && out.back() != ' ') out += ' ';
      out += static_cast<char>(std::tolower(u));
      gap = false;
    } else {
      gap = true;
    }
  }
  if (out.back() != ' ') out += ' ';
  return out;
}

bool has_visible_text(std::string_view text) {
  return std::any_of(text.begin(), text.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return !(u == ' ' || u == '\t' || u == '\n' || u == '\r' || u == '\f');
  });
}

PageStructure analyze_page(std::string_view html) {
  PageStructure page;
  const auto tokens = html::tokenize(html::sanitize_utf8(html));
  FormScope* form = nullptr;
  for (const auto& token : tokens) {
    using Kind = html::Token::Kind;
    if (token.kind == Kind::StartTag) {
      if (token.name == "form") {
        if (form == nullptr) {  // nested <form> start tags are ignored, as browsers do
          page.forms.emplace_back();
          form = &page.forms.back();
          if (auto action = token.attribute("action")) form->action = std::string(*action);
        }
        continue;
      }
      if (token.name == "a") {
        if (auto href = token.attribute("href")) page.hrefs.emplace_back(*href);
      }
      if (form == nullptr) continue;
      const bool control = token.name == "input" || token.name == "select" || token.name == "textarea" ||
                           token.name == "button";
      if (token.name == "input") {
        form->has_input = true;
        auto type = token.attribute("type");
        if (type && normalize_words(*type) == " image ") form->has_image = true;
      }
      if (token.name == "img") form->has_image = true;
      if (control) {
        for (const char* attr : {"type", "name", "id", "placeholder", "aria-label", "title"}) {
          if (auto v = token.attribute(attr)) {
            form->control_text += ' ';
            form->control_text += *v;
          }
        }
      }
    } else if (token.kind == Kind::EndTag) {
      if (token.name == "form") form = nullptr;
    } else if (token.kind == Kind::Text && form != nullptr && !token.raw) {
      form->visible_text += html::decode_entities(token.text);
      form->visible_text += ' ';
    }
  }
  return page;
}

std::string trimmed(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f");
  return std::string(s.substr(first, last - first + 1));
}

bool form_is_bad(const FormScope& form, const std::optional<Url>& page, std::span<const std::string> keywords) {
  if (!form.has_input) return false;

  const std::string scope = normalize_words(form.visible_text + " " + form.control_text);
  bool sensitive = std::any_of(keywords.begin(), keywords.end(), [&](const std::string& kw) {
    const std::string needle = normalize_words(kw);
    return needle.size() > 2 && scope.find(needle) != std::string::npos;
  });
  const bool image_only = form.has_image && !has_visible_text(form.visible_text);
  if (!sensitive && !image_only) return false;

  const std::string action = form.action ? trimmed(*form.action) : std::string();
  if (action.empty()) return !page || page->scheme != "https";
  std::optional<Url> target = page ? resolve_url(*page, action) : parse_url(action);
  return !target || target->scheme != "https";
}

bool action_is_bad(const FormScope& form, const std::optional<Url>& page) {
  const std::string action = form.action ? trimmed(*form.action) : std::string();
  if (action.empty()) return true;
  const bool has_scheme = parse_url(action).has_value();
  const bool protocol_relative = action.rfind("//", 0) == 0;
  if (!has_scheme && !protocol_relative) {
    return action.find('/') == std::string::npos && action.find(':') == std::string::npos;
  }
  std::optional<Url> target = page ? resolve_url(*page, action) : parse_url(action);
  if (!target || !target->is_http() || !target->has_authority) return true;
  if (!page || !page->has_authority) return true;
  return registrable_domain(target->host) != registrable_domain(page->host);
}

// Banded Levenshtein: returns a value > max_distance as soon as the distance
// is known to exceed it.
std::size_t bounded_edit_distance(std::string_view a, std::string_view b, std::size_t max_distance) {
  if (a.size() < b.size()) std::swap(a, b);
  if (a.size() - b.size() > max_distance) return max_distance + 1;
  const std::size_t inf = max_distance + 1;
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = std::min(j, inf);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    const std::size_t lo = i > max_distance ? i - max_distance : 1;
    const std::size_t hi = std::min(b.size(), i + max_distance);
    cur[0] = std::min(i, inf);
    if (lo > 1) cur[lo - 1] = inf;
    std::size_t row_min = cur[0];
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const std::size_t del = prev[j] + 1;
      const std::size_t ins = cur[j - 1] + 1;
      cur[j] = std::min({sub, del, ins, inf});
      row_min = std::min(row_min, cur[j]);
    }
    if (hi < b.size()) cur[hi + 1] = inf;
    if (row_min >= inf) return inf;
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

UrlSimilarityStats similarity_stats_from_hrefs(const std::vector<std::string>& hrefs, const std::optional<Url>& page,
                                               const UrlSimilarityOptions& options) {
  UrlSimilarityStats stats;
  stats.total_links = hrefs.size();
  if (hrefs.empty()) return stats;

  std::size_t illformed = 0;
  std::map<std::string, std::size_t> multiplicity;
  for (const auto& raw : hrefs) {
    const std::string href = trimmed(raw);
    std::optional<Url> resolved;
    if (!href.empty() && href != "#") resolved = page ? resolve_url(*page, href) : parse_url(href);
    const bool bad = !resolved || resolved->scheme == "javascript";
    illformed += bad;
    ++multiplicity[bad ? href : resolved->to_string()];
  }

  std::vector<std::pair<std::string, std::size_t>> unique(multiplicity.begin(), multiplicity.end());
  DisjointSets sets(unique.size());
  for (std::size_t i = 0; i < unique.size(); ++i) {
    for (std::size_t j = i + 1; j < unique.size(); ++j) {
      const auto& a = unique[i].first;
      const auto& b = unique[j].first;
      const std::size_t longest = std::max(a.size(), b.size());
      const auto allowed = static_cast<std::size_t>((1.0 - options.similarity_cutoff) * static_cast<double>(longest) + 1e-9);
      if (bounded_edit_distance(a, b, allowed) <= allowed) sets.unite(i, j);
    }
  }
  std::map<std::size_t, std::size_t> cluster_weight;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    largest = std::max(largest, cluster_weight[sets.find(i)] += unique[i].second);
  }
  const double total = static_cast<double>(hrefs.size());
  stats.similar_fraction = static_cast<double>(largest) / total;
  stats.empty_or_illformed_fraction = static_cast<double>(illformed) / total;
  return stats;
}

}  // namespace

const std::vector<std::string>& default_sensitive_keywords() {
  static const std::vector<std::string> keywords = {"password", "credit card", "card number", "cvv",
                                                    "ssn",      "pin",         "social security"};
  return keywords;
}

bool detect_bad_form(std::string_view html, std::string_view page_url, std::span<const std::string> sensitive_keywords) {
  const auto page = parse_url(page_url);
  const auto structure = analyze_page(html);
  return std::any_of(structure.forms.begin(), structure.forms.end(),
                     [&](const FormScope& f) { return form_is_bad(f, page, sensitive_keywords); });
}

bool detect_bad_action_field(std::string_view html, std::string_view page_url) {
  const auto page = parse_url(page_url);
  const auto structure = analyze_page(html);
  return std::any_of(structure.forms.begin(), structure.forms.end(),
                     [&](const FormScope& f) { return action_is_bad(f, page); });
}

UrlSimilarityStats url_similarity_stats(std::string_view html, std::string_view page_url,
                                        const UrlSimilarityOptions& options) {
  return similarity_stats_from_hrefs(analyze_page(html).hrefs, parse_url(page_url), options);
}

bool detect_non_matching_urls(const UrlSimilarityStats& stats, const NonMatchingThreshold& thr) {
  return stats.similar_fraction > thr.similar_threshold || stats.empty_or_illformed_fraction > thr.illformed_threshold;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  return bounded_edit_distance(a, b, std::max(a.size(), b.size()));
}

double edit_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

NonMatchingThreshold fit_nonmatching_threshold(std::span<const std::pair<UrlSimilarityStats, Label>> samples,
                                               std::string fitted_on) {
  std::size_t phish = 0;
  std::size_t legit = 0;
  for (const auto& [stats, label] : samples) {
    phish += label == Label::Phishing;
    legit += label == Label::NonPhishing;
  }
  if (phish + legit == 0) throw Error(ErrorCode::EmptyCorpus, "no labeled samples to fit thresholds on");
  if (phish == 0 || legit == 0) throw Error(ErrorCode::InvalidArgument, "threshold fitting needs both classes");

  NonMatchingThreshold best{0.05, 0.05, std::move(fitted_on)};
  std::size_t best_correct = 0;
  bool first = true;
  for (int s = 1; s <= 19; ++s) {
    for (int f = 1; f <= 19; ++f) {
      const NonMatchingThreshold candidate{s / 20.0, f / 20.0, {}};
      std::size_t correct = 0;
      for (const auto& [stats, label] : samples) {
        if (!is_known(label)) continue;
        const bool flagged = detect_non_matching_urls(stats, candidate);
        correct += flagged == (label == Label::Phishing);
      }
      if (first || correct > best_correct) {
        best.similar_threshold = candidate.similar_threshold;
        best.illformed_threshold = candidate.illformed_threshold;
        best_correct = correct;
        first = false;
      }
    }
  }
  return best;
}

NonMatchingThreshold fit_nonmatching_threshold(const Corpus& train, const UrlSimilarityOptions& options) {
  std::vector<std::pair<UrlSimilarityStats, Label>> samples;
  for (const auto& doc : train.documents()) {
    if (!is_known(doc.label)) continue;
    samples.emplace_back(url_similarity_stats(doc.html, doc.url, options), doc.label);
  }
  return fit_nonmatching_threshold(samples, train.fingerprint());
}

HtmlFeatureVector compute_html_features(const WebDocument& doc, const HtmlFeatureOptions& options) {
  const auto page = parse_url(doc.url);
  const auto structure = analyze_page(doc.html);
  HtmlFeatureVector out;
  out.doc_id = doc.id;
  out.bad_form = std::any_of(structure.forms.begin(), structure.forms.end(),
                             [&](const FormScope& f) { return form_is_bad(f, page, options.sensitive_keywords); });
  out.bad_action_field = std::any_of(structure.forms.begin(), structure.forms.end(),
                                     [&](const FormScope& f) { return action_is_bad(f, page); });
  out.non_matching_urls =
      detect_non_matching_urls(similarity_stats_from_hrefs(structure.hrefs, page, options.similarity), options.non_matching);
  return out;
}

void save_threshold(const NonMatchingThreshold& thr, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["similar_threshold"] = thr.similar_threshold;
  j["illformed_threshold"] = thr.illformed_threshold;
  j["fitted_on"] = thr.fitted_on;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

NonMatchingThreshold load_threshold(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    NonMatchingThreshold thr{j.at("similar_threshold").get<double>(), j.at("illformed_threshold").get<double>(),
                             j.value("fitted_on", std::string())};
    auto valid = [](double t) { return t > 0.0 && t <= 1.0; };
    if (!valid(thr.similar_threshold) || !valid(thr.illformed_threshold)) {
      throw Error(ErrorCode::Parse, "thresholds must lie in (0, 1]");
    }
    return thr;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace lexzip

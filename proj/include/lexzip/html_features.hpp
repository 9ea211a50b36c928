#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexzip/corpus.hpp"

namespace lexzip {

/// Three binary page heuristics: bad forms, bad action fields and
/// non-matching URLs.
struct HtmlFeatureVector {
  std::string doc_id;
  bool bad_form = false;
  bool bad_action_field = false;
  bool non_matching_urls = false;
};

struct UrlSimilarityStats {
  std::size_t total_links = 0;
  double similar_fraction = 0.0;
  double empty_or_illformed_fraction = 0.0;
};

struct NonMatchingThreshold {
  double similar_threshold = 0.5;
  double illformed_threshold = 0.5;
  std::string fitted_on;
};

/// {"password", "credit card", "card number", "cvv", "ssn", "pin",
/// "social security"}.
const std::vector<std::string>& default_sensitive_keywords();

/// 1 iff some form contains an <input>, has a sensitive keyword (whole-word,
/// case-insensitive) or only images and no text in its scope, and submits
/// over a non-https URL: its action, or the page URL when the action is
/// empty or missing.
bool detect_bad_form(std::string_view html, std::string_view page_url,
                     std::span<const std::string> sensitive_keywords = default_sensitive_keywords());

/// 1 iff some form's action is empty/missing, a bare file name (no '/' and no
/// scheme), or an absolute URL on a different registrable domain than the page.
bool detect_bad_action_field(std::string_view html, std::string_view page_url);

struct UrlSimilarityOptions {
  double similarity_cutoff = 0.9;  // normalized Levenshtein similarity
};

/// Over all <a href> values: the share that are empty, "#" or ill-formed, and
/// the share held by the largest cluster of links linked by pairwise
/// similarity >= cutoff (single linkage).
UrlSimilarityStats url_similarity_stats(std::string_view html, std::string_view page_url,
                                        const UrlSimilarityOptions& options = {});

/// 1 iff similar_fraction > similar_threshold or
/// empty_or_illformed_fraction > illformed_threshold (strict).
bool detect_non_matching_urls(const UrlSimilarityStats& stats, const NonMatchingThreshold& thr);

/// Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// 1 - distance / max(len); 1 for two empty strings.
double edit_similarity(std::string_view a, std::string_view b);

/// Grid search over {0.05, 0.10, ..., 0.95}^2 maximizing TP + TN, ties to the
/// smallest (similar, illformed) pair. Throws Error(EmptyCorpus) without
/// labeled samples and Error(InvalidArgument) when a class is missing.
NonMatchingThreshold fit_nonmatching_threshold(std::span<const std::pair<UrlSimilarityStats, Label>> samples,
                                               std::string fitted_on = {});
NonMatchingThreshold fit_nonmatching_threshold(const Corpus& train, const UrlSimilarityOptions& options = {});

struct HtmlFeatureOptions {
  std::vector<std::string> sensitive_keywords = default_sensitive_keywords();
  UrlSimilarityOptions similarity;
  NonMatchingThreshold non_matching;
};

/// All three features in one parse of the page.
HtmlFeatureVector compute_html_features(const WebDocument& doc, const HtmlFeatureOptions& options = {});

void save_threshold(const NonMatchingThreshold& thr, const std::filesystem::path& path);
NonMatchingThreshold load_threshold(const std::filesystem::path& path);

}  // namespace lexzip

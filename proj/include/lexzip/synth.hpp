#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lexzip/corpus.hpp"

namespace lexzip {

/// Categorical distribution over words. Probabilities must be non-negative
/// and sum to 1 within 1e-9.
struct WordDistribution {
  std::vector<std::string> words;
  std::vector<double> probabilities;
};

/// Throws Error(InvalidDistribution) if `dist` is not a valid probability
/// vector over its words.
void validate_distribution(const WordDistribution& dist);

/// p(rank r) proportional to 1 / r^exponent, r = 1..words.size().
WordDistribution zipf_distribution(std::vector<std::string> words, double exponent = 1.0);

/// Optional page structure layered on top of the sampled text. All rates are
/// per-page probabilities except `empty_link_rate`, which is per anchor.
struct PageTraits {
  double https_rate = 0.0;
  double login_form_rate = 0.0;
  double offsite_action_rate = 0.0;  // among login forms
  std::size_t min_links = 0;
  std::size_t max_links = 0;
  double empty_link_rate = 0.0;
  double templated_links_rate = 0.0;  // pages whose links differ only by a counter
};

struct ClassProfile {
  WordDistribution words;
  PageTraits traits;
};

struct SyntheticCorpusSpec {
  std::size_t documents = 200;
  double phishing_fraction = 0.5;
  std::size_t min_tokens = 80;
  std::size_t max_tokens = 160;
  Timestamp start = parse_timestamp("2019-01-01T00:00:00Z");
  Timestamp end = parse_timestamp("2019-06-01T00:00:00Z");
  std::string id_prefix = "syn";
  ClassProfile phishing;
  ClassProfile non_phishing;
};

/// Deterministic in (spec, seed): every document is drawn from its own random
/// stream, so output bytes are reproducible across runs and thread counts.
/// Each page is a minimal HTML wrapper around a word sequence sampled from its
/// class distribution.
Corpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec, std::uint64_t seed);

/// JSON form of the spec. Each class gives either explicit
/// {"words": [...], "probabilities": [...]} or {"words": [...], "zipf": s}.
SyntheticCorpusSpec parse_synthetic_spec(std::string_view json_text);
SyntheticCorpusSpec load_synthetic_spec(const std::filesystem::path& path);

}  // namespace lexzip

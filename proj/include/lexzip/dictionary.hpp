#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexzip/corpus.hpp"
#include "lexzip/text.hpp"

namespace lexzip {

struct ScoredWord {
  std::string word;
  double likelihood = 0.0;

  bool operator==(const ScoredWord&) const = default;
};

/// Per-class word-occurrence likelihoods under the m-estimate with uniform
/// priors and m = |V|:
///
///     P(w | class) = (count(w) + 1) / (n_total + vocab_size)
///
/// where n_total is the number of word positions in the class text and
/// vocab_size the number of distinct words over all classes. Words never seen
/// in the class still receive 1 / (n_total + vocab_size).
class LikelihoodTable {
 public:
  /// Throws Error(EmptyVocabulary) when vocab_size == 0 and
  /// Error(InvalidArgument) when vocab_size is smaller than the number of
  /// distinct counted words.
  LikelihoodTable(Label class_label, std::map<std::string, std::uint64_t, std::less<>> counts,
                  std::uint64_t vocab_size);

  /// Counts every token of every sequence.
  static LikelihoodTable build(Label class_label, std::span<const TokenSequence> class_tokens,
                               std::uint64_t global_vocab_size);

  Label class_label() const { return class_label_; }
  std::uint64_t n_total() const { return n_total_; }
  std::uint64_t vocab_size() const { return vocab_size_; }
  const std::map<std::string, std::uint64_t, std::less<>>& counts() const { return counts_; }
  std::uint64_t count(std::string_view word) const;

  double likelihood(std::string_view word) const;
  double likelihood_of_count(std::uint64_t count) const;

  /// Likelihood of every counted word, in lexicographic word order.
  std::vector<ScoredWord> likelihoods() const;

 private:
  Label class_label_;
  std::map<std::string, std::uint64_t, std::less<>> counts_;
  std::uint64_t n_total_ = 0;
  std::uint64_t vocab_size_ = 0;
};

/// Number of distinct tokens across the given sequences.
std::uint64_t vocabulary_size(std::span<const TokenSequence> a, std::span<const TokenSequence> b = {});

/// The k most likely counted words, descending; equal likelihoods are ordered
/// lexicographically ascending. Returns fewer when the table is smaller.
std::vector<ScoredWord> top_k_words(const LikelihoodTable& table, std::size_t k);

/// Nearest-rank percentiles over a stored likelihood list. Each percentile
/// must lie in (0, 1]. Throws Error(EmptyTable) for an empty list.
std::vector<std::pair<double, double>> likelihood_percentiles(std::span<const ScoredWord> stored,
                                                              std::span<const double> percentiles);

inline constexpr std::size_t kPresetDictionaryLimit = 32768;
inline constexpr std::size_t kDefaultTopK = 3000;

/// Words above a likelihood threshold, serialized as a preset compression
/// dictionary: space-separated, ascending likelihood, so the most likely
/// words sit at the end where back-reference distances are shortest.
struct DictionaryModel {
  Label class_label = Label::Unknown;
  double threshold = 0.0;
  std::vector<ScoredWord> words;  // ascending likelihood
  std::string dict_bytes;
  std::string built_from;  // corpus fingerprint
};

struct DictionaryOptions {
  std::size_t top_k = kDefaultTopK;
  std::size_t max_bytes = kPresetDictionaryLimit;
};

/// Keeps the candidates with likelihood strictly greater than `threshold`. If
/// the serialized form would exceed max_bytes the least likely words are
/// dropped first. Throws Error(EmptyDictionary) when nothing survives and
/// Error(InvalidArgument) unless 0 < threshold < 1.
DictionaryModel build_dictionary(std::span<const ScoredWord> candidates, Label class_label, double threshold,
                                 std::size_t max_bytes = kPresetDictionaryLimit, std::string built_from = {});

/// Same, using the table's top_k words as candidates.
DictionaryModel build_dictionary(const LikelihoodTable& table, double threshold, const DictionaryOptions& options = {},
                                 std::string built_from = {});

/// Writes `<prefix>.dict` (exactly dict_bytes) and `<prefix>.json` metadata.
void save_dictionary(const DictionaryModel& model, const std::filesystem::path& prefix);

/// Loads a `.dict` file. When the sibling `.json` exists its metadata is
/// attached (and must describe the same bytes); otherwise words are recovered
/// by splitting on spaces and the label is Unknown.
DictionaryModel load_dictionary(const std::filesystem::path& dict_path);

/// Both class tables of a labeled training corpus, sharing one |V|.
struct CorpusLikelihoods {
  LikelihoodTable phishing;
  LikelihoodTable non_phishing;
  std::string fingerprint;
};

/// Extracts text, tokenizes and counts each class of `train`. Unknown-label
/// documents are ignored.
CorpusLikelihoods analyze_corpus(const Corpus& train, const StopwordList& stopwords = StopwordList::english(),
                                 unsigned jobs = 1);

struct SweepPoint {
  double threshold = 0.0;
  std::size_t phish_dict_size = 0;
  std::size_t nonphish_dict_size = 0;
  std::optional<double> accuracy;  // absent when a dictionary came out empty
};

struct ThresholdSweepReport {
  std::vector<SweepPoint> grid;
  double best_threshold = 0.0;
  double best_accuracy = 0.0;
};

struct SweepOptions {
  DictionaryOptions dictionary;
  int level = 9;
  unsigned jobs = 1;
};

/// For every threshold builds both dictionaries from `train`, classifies the
/// labeled `holdout` pages by which model yields the smaller compressed size
/// and records accuracy. Grid points where a dictionary is empty are skipped.
/// Throws Error(SweepFailed) if every point is skipped.
ThresholdSweepReport sweep_threshold(const Corpus& train, const Corpus& holdout, std::span<const double> grid,
                                     const SweepOptions& options = {},
                                     const StopwordList& stopwords = StopwordList::english());

/// Same, with precomputed likelihood tables.
ThresholdSweepReport sweep_threshold(const CorpusLikelihoods& tables, const Corpus& holdout,
                                     std::span<const double> grid, const SweepOptions& options = {});

/// `count` logarithmically spaced values in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// 20 log-spaced points in [1e-5, 5e-3].
std::vector<double> default_threshold_grid();

/// "log:LO:HI:N", "lin:LO:HI:N" or a comma-separated list. The result must be
/// non-empty and strictly increasing.
std::vector<double> parse_grid_spec(std::string_view spec);

std::string sweep_report_json(const ThresholdSweepReport& report);

}  // namespace lexzip

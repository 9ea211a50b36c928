#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexzip/corpus.hpp"
#include "lexzip/dictionary.hpp"

namespace lexzip {

/// A DEFLATE encoder configuration carrying a class-specific preset
/// dictionary. Immutable; safe to share across threads.
class CompressionModel {
 public:
  /// Throws Error(InvalidArgument) for empty dictionary bytes or a level
  /// outside [1, 9].
  CompressionModel(Label class_label, DictionaryModel dictionary, int level = 9);
  explicit CompressionModel(DictionaryModel dictionary, int level = 9);

  Label class_label() const { return class_label_; }
  const DictionaryModel& dictionary() const { return dictionary_; }
  int level() const { return level_; }

 private:
  Label class_label_;
  DictionaryModel dictionary_;
  int level_;
};

/// zlib stream (RFC 1950) with the FDICT flag set and the dictionary's
/// Adler-32 in the header. Deterministic for fixed (payload, dictionary,
/// level). Throws Error(EmptyInput) for an empty payload.
std::string compress_with_dictionary(std::string_view payload, const CompressionModel& model);

/// Inverse of compress_with_dictionary. Throws Error(Parse) on a corrupt
/// stream or a dictionary whose checksum does not match the header.
std::string decompress_with_dictionary(std::string_view stream, std::string_view dictionary);

struct CompressionOutcome {
  Label model_label = Label::Unknown;
  std::size_t input_size = 0;
  std::size_t output_size = 0;
  double ratio = 0.0;  // input_size / output_size
};

/// Compression ratio = size(payload) / size(compressed payload).
CompressionOutcome compression_ratio(std::string_view payload, const CompressionModel& model);

struct ClassificationResult {
  std::string doc_id;
  CompressionOutcome phishing_outcome;
  CompressionOutcome nonphishing_outcome;
  Label predicted = Label::NonPhishing;
  bool tie = false;
};

/// Phishing iff the phishing model achieves the strictly higher ratio; equal
/// ratios resolve to NonPhishing with `tie` set.
ClassificationResult decide(std::string doc_id, const CompressionOutcome& phishing,
                            const CompressionOutcome& nonphishing);

/// Compresses the raw HTML bytes with both models and applies `decide`.
/// Throws Error(EmptyInput) for an empty page and Error(ModelMismatch) when
/// the models were built from different corpora.
ClassificationResult classify(const WebDocument& doc, const CompressionModel& phish_model,
                              const CompressionModel& legit_model);

struct BatchEntry {
  std::string doc_id;
  std::optional<ClassificationResult> result;
  std::string error;  // set when result is absent
};

/// Order-preserving; per-document failures are recorded, not thrown.
std::vector<BatchEntry> classify_batch(const Corpus& corpus, const CompressionModel& phish_model,
                                       const CompressionModel& legit_model, unsigned jobs = 1);

/// JSON Lines: {doc_id, phish_ratio, legit_ratio, predicted, tie} per result,
/// {doc_id, error} for failures.
std::string classification_jsonl(const std::vector<BatchEntry>& entries);

}  // namespace lexzip

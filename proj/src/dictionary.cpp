#include "lexzip/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "lexzip/compressor.hpp"
#include "lexzip/error.hpp"
#include "lexzip/parallel.hpp"

namespace lexzip {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Descending likelihood, ties lexicographically ascending. Likelihood is
// strictly increasing in count, so ranking by count avoids float compares.
bool ranks_before(const std::pair<std::string_view, std::uint64_t>& a,
                  const std::pair<std::string_view, std::uint64_t>& b) {
  if (a.second != b.second) return a.second > b.second;
  return a.first < b.first;
}

std::size_t serialized_size(std::span<const ScoredWord> words) {
  if (words.empty()) return 0;
  std::size_t total = words.size() - 1;
  for (const auto& w : words) total += w.word.size();
  return total;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

LikelihoodTable::LikelihoodTable(Label class_label, std::map<std::string, std::uint64_t, std::less<>> counts,
                                 std::uint64_t vocab_size)
    : class_label_(class_label), counts_(std::move(counts)), vocab_size_(vocab_size) {
  if (vocab_size_ == 0) throw Error(ErrorCode::EmptyVocabulary, "global vocabulary size is 0");
  if (vocab_size_ < counts_.size()) {
    throw Error(ErrorCode::InvalidArgument, "vocabulary size " + std::to_string(vocab_size_) + " is below the " +
                                                std::to_string(counts_.size()) + " counted words");
  }
  for (const auto& [word, c] : counts_) n_total_ += c;
}

LikelihoodTable LikelihoodTable::build(Label class_label, std::span<const TokenSequence> class_tokens,
                                       std::uint64_t global_vocab_size) {
  if (global_vocab_size == 0) throw Error(ErrorCode::EmptyVocabulary, "global vocabulary size is 0");
  std::map<std::string, std::uint64_t, std::less<>> counts;
  for (const auto& seq : class_tokens) {
    for (const auto& token : seq.tokens) ++counts[token];
  }
  return LikelihoodTable(class_label, std::move(counts), global_vocab_size);
}

std::uint64_t LikelihoodTable::count(std::string_view word) const {
  auto it = counts_.find(word);
  return it == counts_.end() ? 0 : it->second;
}

double LikelihoodTable::likelihood_of_count(std::uint64_t c) const {
  return static_cast<double>(c + 1) / static_cast<double>(n_total_ + vocab_size_);
}

double LikelihoodTable::likelihood(std::string_view word) const { return likelihood_of_count(count(word)); }

std::vector<ScoredWord> LikelihoodTable::likelihoods() const {
  std::vector<ScoredWord> out;
  out.reserve(counts_.size());
  for (const auto& [word, c] : counts_) out.push_back({word, likelihood_of_count(c)});
  return out;
}

std::uint64_t vocabulary_size(std::span<const TokenSequence> a, std::span<const TokenSequence> b) {
  std::unordered_set<std::string_view> seen;
  for (auto part : {a, b}) {
    for (const auto& seq : part) {
      for (const auto& token : seq.tokens) seen.insert(token);
    }
  }
  return seen.size();
}

std::vector<ScoredWord> top_k_words(const LikelihoodTable& table, std::size_t k) {
  std::vector<std::pair<std::string_view, std::uint64_t>> ranked(table.counts().begin(), table.counts().end());
  const std::size_t keep = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), ranks_before);
  std::vector<ScoredWord> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back({std::string(ranked[i].first), table.likelihood_of_count(ranked[i].second)});
  }
  return out;
}

std::vector<std::pair<double, double>> likelihood_percentiles(std::span<const ScoredWord> stored,
                                                              std::span<const double> percentiles) {
  if (stored.empty()) throw Error(ErrorCode::EmptyTable, "no stored likelihoods");
  std::vector<double> values;
  values.reserve(stored.size());
  for (const auto& w : stored) values.push_back(w.likelihood);
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(percentiles.size());
  const double n = static_cast<double>(values.size());
  for (double p : percentiles) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "percentile must be in (0, 1]");
    // Nearest rank; the small slack keeps 0.3 * 10 from rounding up to 4.
    auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    out.emplace_back(p, values[rank - 1]);
  }
  return out;
}

DictionaryModel build_dictionary(std::span<const ScoredWord> candidates, Label class_label, double threshold,
                                 std::size_t max_bytes, std::string built_from) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be in (0, 1)");
  std::vector<ScoredWord> kept;
  for (const auto& c : candidates) {
    if (c.likelihood > threshold) kept.push_back(c);
  }
  // Ascending likelihood; among equals, reverse lexicographic so that reading
  // the list backwards gives the top-k order.
  std::sort(kept.begin(), kept.end(), [](const ScoredWord& a, const ScoredWord& b) {
    if (a.likelihood != b.likelihood) return a.likelihood < b.likelihood;
    return a.word > b.word;
  });
  std::size_t size = serialized_size(kept);
  std::size_t drop = 0;
  while (drop < kept.size() && size > max_bytes) {
    size -= kept[drop].word.size() + (kept.size() - drop > 1 ? 1 : 0);
    ++drop;
  }
  kept.erase(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(drop));
  if (kept.empty()) {
    throw Error(ErrorCode::EmptyDictionary, "no word has likelihood above " + std::to_string(threshold));
  }

  DictionaryModel model;
  model.class_label = class_label;
  model.threshold = threshold;
  model.built_from = std::move(built_from);
  model.dict_bytes.reserve(size);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i) model.dict_bytes += ' ';
    model.dict_bytes += kept[i].word;
  }
  model.words = std::move(kept);
  return model;
}

DictionaryModel build_dictionary(const LikelihoodTable& table, double threshold, const DictionaryOptions& options,
                                 std::string built_from) {
  const auto candidates = top_k_words(table, options.top_k);
  return build_dictionary(candidates, table.class_label(), threshold, options.max_bytes, std::move(built_from));
}

void save_dictionary(const DictionaryModel& model, const std::filesystem::path& prefix) {
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  const auto dict_path = std::filesystem::path(prefix.string() + ".dict");
  const auto meta_path = std::filesystem::path(prefix.string() + ".json");
  {
    std::ofstream out(dict_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + dict_path.string());
    out.write(model.dict_bytes.data(), static_cast<std::streamsize>(model.dict_bytes.size()));
  }
  ordered_json meta;
  meta["class"] = to_string(model.class_label);
  meta["threshold"] = model.threshold;
  meta["corpus_fingerprint"] = model.built_from;
  meta["word_count"] = model.words.size();
  meta["words"] = ordered_json::array();
  for (const auto& w : model.words) meta["words"].push_back({{"word", w.word}, {"likelihood", w.likelihood}});
  std::ofstream out(meta_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + meta_path.string());
  out << meta.dump(2) << '\n';
}

DictionaryModel load_dictionary(const std::filesystem::path& dict_path) {
  DictionaryModel model;
  model.dict_bytes = read_bytes(dict_path);
  auto meta_path = dict_path;
  meta_path.replace_extension(".json");
  if (std::filesystem::exists(meta_path)) {
    try {
      const json meta = json::parse(read_bytes(meta_path));
      const auto label = parse_label(meta.at("class").get<std::string>());
      if (!label) throw Error(ErrorCode::Parse, "bad class in " + meta_path.string());
      model.class_label = *label;
      model.threshold = meta.at("threshold").get<double>();
      model.built_from = meta.value("corpus_fingerprint", std::string());
      for (const auto& w : meta.at("words")) {
        model.words.push_back({w.at("word").get<std::string>(), w.at("likelihood").get<double>()});
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, meta_path.string() + ": " + e.what());
    }
    std::string joined;
    for (std::size_t i = 0; i < model.words.size(); ++i) {
      if (i) joined += ' ';
      joined += model.words[i].word;
    }
    if (joined != model.dict_bytes) {
      throw Error(ErrorCode::Parse, meta_path.string() + " does not describe " + dict_path.string());
    }
  } else {
    std::istringstream in(model.dict_bytes);
    std::string word;
    while (in >> word) model.words.push_back({word, 0.0});
  }
  return model;
}

CorpusLikelihoods analyze_corpus(const Corpus& train, const StopwordList& stopwords, unsigned jobs) {
  const auto& docs = train.documents();
  std::vector<TokenSequence> sequences(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) { sequences[i] = preprocess(docs[i].id, docs[i].html, stopwords); });

  std::vector<TokenSequence> phish;
  std::vector<TokenSequence> legit;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].label == Label::Phishing) phish.push_back(std::move(sequences[i]));
    else if (docs[i].label == Label::NonPhishing) legit.push_back(std::move(sequences[i]));
  }
  const std::uint64_t vocab = vocabulary_size(phish, legit);
  return CorpusLikelihoods{LikelihoodTable::build(Label::Phishing, phish, vocab),
                           LikelihoodTable::build(Label::NonPhishing, legit, vocab), train.fingerprint()};
}

ThresholdSweepReport sweep_threshold(const CorpusLikelihoods& tables, const Corpus& holdout,
                                     std::span<const double> grid, const SweepOptions& options) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "threshold grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "threshold grid must be strictly increasing");
  }
  if (holdout.count(Label::Phishing) == 0 || holdout.count(Label::NonPhishing) == 0) {
    throw Error(ErrorCode::InvalidArgument, "holdout must contain both classes");
  }
  if (tables.phishing.counts().empty() || tables.non_phishing.counts().empty()) {
    throw Error(ErrorCode::InvalidArgument, "training corpus must contain text for both classes");
  }

  const auto phish_candidates = top_k_words(tables.phishing, options.dictionary.top_k);
  const auto legit_candidates = top_k_words(tables.non_phishing, options.dictionary.top_k);
  std::vector<const WebDocument*> labeled;
  for (const auto& doc : holdout.documents()) {
    if (is_known(doc.label)) labeled.push_back(&doc);
  }

  ThresholdSweepReport report;
  report.grid.resize(grid.size());
  parallel_for(grid.size(), options.jobs, [&](std::size_t g) {
    SweepPoint& point = report.grid[g];
    point.threshold = grid[g];
    std::optional<DictionaryModel> phish_dict;
    std::optional<DictionaryModel> legit_dict;
    try {
      phish_dict = build_dictionary(phish_candidates, Label::Phishing, grid[g], options.dictionary.max_bytes);
      point.phish_dict_size = phish_dict->words.size();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyDictionary) throw;
    }
    try {
      legit_dict = build_dictionary(legit_candidates, Label::NonPhishing, grid[g], options.dictionary.max_bytes);
      point.nonphish_dict_size = legit_dict->words.size();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyDictionary) throw;
    }
    if (!phish_dict || !legit_dict) return;

    const CompressionModel phish_model(Label::Phishing, std::move(*phish_dict), options.level);
    const CompressionModel legit_model(Label::NonPhishing, std::move(*legit_dict), options.level);
    std::size_t correct = 0;
    for (const WebDocument* doc : labeled) {
      // Same input size for both models, so the higher ratio is the smaller output.
      const auto phish_size = compress_with_dictionary(doc->html, phish_model).size();
      const auto legit_size = compress_with_dictionary(doc->html, legit_model).size();
      const Label predicted = phish_size < legit_size ? Label::Phishing : Label::NonPhishing;
      correct += predicted == doc->label;
    }
    point.accuracy = static_cast<double>(correct) / static_cast<double>(labeled.size());
  });

  bool any = false;
  for (const auto& point : report.grid) {
    if (!point.accuracy) continue;
    if (!any || *point.accuracy > report.best_accuracy) {
      report.best_accuracy = *point.accuracy;
      report.best_threshold = point.threshold;
      any = true;
    }
  }
  if (!any) throw Error(ErrorCode::SweepFailed, "every grid point produced an empty dictionary");
  return report;
}

ThresholdSweepReport sweep_threshold(const Corpus& train, const Corpus& holdout, std::span<const double> grid,
                                     const SweepOptions& options, const StopwordList& stopwords) {
  return sweep_threshold(analyze_corpus(train, stopwords, options.jobs), holdout, grid, options);
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count == 0) throw Error(ErrorCode::InvalidArgument, "log grid needs 0 < lo < hi and count > 0");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> default_threshold_grid() { return log_grid(1e-5, 5e-3, 20); }

std::vector<double> parse_grid_spec(std::string_view spec) {
  auto fail = [&] { return Error(ErrorCode::Parse, "bad grid spec '" + std::string(spec) + "'"); };
  std::vector<std::string> parts;
  std::vector<double> grid;
  const bool ranged = spec.rfind("log:", 0) == 0 || spec.rfind("lin:", 0) == 0;
  const char sep = ranged ? ':' : ',';
  std::string current;
  for (char c : spec) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  try {
    if (ranged) {
      if (parts.size() != 4) throw fail();
      const double lo = std::stod(parts[1]);
      const double hi = std::stod(parts[2]);
      const auto n = static_cast<std::size_t>(std::stoul(parts[3]));
      if (parts[0] == "log") {
        grid = log_grid(lo, hi, n);
      } else {
        if (n == 0 || !(hi > lo)) throw fail();
        for (std::size_t i = 0; i < n; ++i) {
          grid.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
        }
      }
    } else {
      for (const auto& p : parts) grid.push_back(std::stod(p));
    }
  } catch (const std::invalid_argument&) {
    throw fail();
  } catch (const std::out_of_range&) {
    throw fail();
  }
  if (grid.empty()) throw fail();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::Parse, "grid must be strictly increasing");
  }
  return grid;
}

std::string sweep_report_json(const ThresholdSweepReport& report) {
  ordered_json j;
  j["best_threshold"] = report.best_threshold;
  j["best_accuracy"] = report.best_accuracy;
  j["grid"] = ordered_json::array();
  for (const auto& p : report.grid) {
    ordered_json row;
    row["threshold"] = p.threshold;
    row["phish_dict_size"] = p.phish_dict_size;
    row["nonphish_dict_size"] = p.nonphish_dict_size;
    row["accuracy"] = p.accuracy ? ordered_json(*p.accuracy) : ordered_json(nullptr);
    j["grid"].push_back(row);
  }
  return j.dump(2) + "\n";
}

}  // namespace lexzip

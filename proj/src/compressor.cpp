#include "lexzip/compressor.hpp"

#include <zlib.h>

#include <json.hpp>

#include "lexzip/error.hpp"
#include "lexzip/parallel.hpp"

namespace lexzip {
namespace {

constexpr int kWindowBits = 15;  // zlib framing, 32 KiB window
constexpr int kMemLevel = 8;

const Bytef* as_bytes(std::string_view s) { return reinterpret_cast<const Bytef*>(s.data()); }

}  // namespace

CompressionModel::CompressionModel(Label class_label, DictionaryModel dictionary, int level)
    : class_label_(class_label), dictionary_(std::move(dictionary)), level_(level) {
  if (dictionary_.dict_bytes.empty()) throw Error(ErrorCode::InvalidArgument, "compression model needs a non-empty dictionary");
  if (level_ < 1 || level_ > 9) throw Error(ErrorCode::InvalidArgument, "compression level must be in [1, 9]");
}

CompressionModel::CompressionModel(DictionaryModel dictionary, int level)
    : CompressionModel(dictionary.class_label, std::move(dictionary), level) {}

std::string compress_with_dictionary(std::string_view payload, const CompressionModel& model) {
  if (payload.empty()) throw Error(ErrorCode::EmptyInput, "cannot compress an empty payload");
  z_stream zs{};
  if (deflateInit2(&zs, model.level(), Z_DEFLATED, kWindowBits, kMemLevel, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(ErrorCode::InvalidArgument, "deflateInit2 failed");
  }
  const std::string& dict = model.dictionary().dict_bytes;
  if (deflateSetDictionary(&zs, as_bytes(dict), static_cast<uInt>(dict.size())) != Z_OK) {
    deflateEnd(&zs);
    throw Error(ErrorCode::InvalidArgument, "deflateSetDictionary failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(payload.size())), '\0');
  zs.next_in = const_cast<Bytef*>(as_bytes(payload));
  zs.avail_in = static_cast<uInt>(payload.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const std::size_t produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::InvalidArgument, "deflate did not finish");
  out.resize(produced);
  return out;
}

std::string decompress_with_dictionary(std::string_view stream, std::string_view dictionary) {
  z_stream zs{};
  if (inflateInit2(&zs, kWindowBits) != Z_OK) throw Error(ErrorCode::Parse, "inflateInit2 failed");
  zs.next_in = const_cast<Bytef*>(as_bytes(stream));
  zs.avail_in = static_cast<uInt>(stream.size());
  std::string out;
  char buffer[16384];
  for (;;) {
    zs.next_out = reinterpret_cast<Bytef*>(buffer);
    zs.avail_out = sizeof buffer;
    int rc = inflate(&zs, Z_NO_FLUSH);
    if (rc == Z_NEED_DICT) {
      if (inflateSetDictionary(&zs, as_bytes(dictionary), static_cast<uInt>(dictionary.size())) != Z_OK) {
        inflateEnd(&zs);
        throw Error(ErrorCode::Parse, "dictionary does not match the stream's checksum");
      }
      rc = inflate(&zs, Z_NO_FLUSH);
    }
    out.append(buffer, sizeof buffer - zs.avail_out);
    if (rc == Z_STREAM_END) break;
    if (rc != Z_OK && rc != Z_BUF_ERROR) {
      inflateEnd(&zs);
      throw Error(ErrorCode::Parse, "corrupt deflate stream");
    }
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) {
      inflateEnd(&zs);
      throw Error(ErrorCode::Parse, "truncated deflate stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

CompressionOutcome compression_ratio(std::string_view payload, const CompressionModel& model) {
  const std::size_t output = compress_with_dictionary(payload, model).size();
  return CompressionOutcome{model.class_label(), payload.size(), output,
                            static_cast<double>(payload.size()) / static_cast<double>(output)};
}

ClassificationResult decide(std::string doc_id, const CompressionOutcome& phishing,
                            const CompressionOutcome& nonphishing) {
  ClassificationResult result;
  result.doc_id = std::move(doc_id);
  result.phishing_outcome = phishing;
  result.nonphishing_outcome = nonphishing;
  result.tie = phishing.ratio == nonphishing.ratio;
  result.predicted = phishing.ratio > nonphishing.ratio ? Label::Phishing : Label::NonPhishing;
  return result;
}

ClassificationResult classify(const WebDocument& doc, const CompressionModel& phish_model,
                              const CompressionModel& legit_model) {
  if (doc.html.empty()) throw Error(ErrorCode::EmptyInput, "document " + doc.id + " has an empty body");
  const auto& a = phish_model.dictionary().built_from;
  const auto& b = legit_model.dictionary().built_from;
  if (!a.empty() && !b.empty() && a != b) {
    throw Error(ErrorCode::ModelMismatch, "dictionaries built from different corpora (" + a + " vs " + b + ")");
  }
  return decide(doc.id, compression_ratio(doc.html, phish_model), compression_ratio(doc.html, legit_model));
}

std::vector<BatchEntry> classify_batch(const Corpus& corpus, const CompressionModel& phish_model,
                                       const CompressionModel& legit_model, unsigned jobs) {
  const auto& docs = corpus.documents();
  std::vector<BatchEntry> entries(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    entries[i].doc_id = docs[i].id;
    try {
      entries[i].result = classify(docs[i], phish_model, legit_model);
    } catch (const Error& e) {
      entries[i].error = e.what();
    }
  });
  return entries;
}

std::string classification_jsonl(const std::vector<BatchEntry>& entries) {
  std::string out;
  for (const auto& entry : entries) {
    nlohmann::ordered_json j;
    j["doc_id"] = entry.doc_id;
    if (entry.result) {
      j["phish_ratio"] = entry.result->phishing_outcome.ratio;
      j["legit_ratio"] = entry.result->nonphishing_outcome.ratio;
      j["predicted"] = to_string(entry.result->predicted);
      j["tie"] = entry.result->tie;
    } else {
      j["error"] = entry.error;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace lexzip

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "lexzip/corpus.hpp"

namespace lexzip {

struct FetchOptions {
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
  std::string user_agent = "lexzip-fetch/1.0";
  long max_redirects = 5;
};

/// Downloads the raw body of an http(s) URL. Only the bytes on the wire are
/// kept; nothing is rendered or executed. The returned document is labeled
/// Unknown with source Fetched and an id derived from the URL.
///
/// Throws Error(NetworkError) for transport failures (DNS, refused, timeout,
/// too many redirects), HttpError for a non-2xx final status and
/// Error(EmptyBody) for a zero-length body.
WebDocument fetch_url(const std::string& url, const FetchOptions& options = {});

struct FetchOutcome {
  std::string url;
  std::optional<WebDocument> document;
  std::string error;  // empty on success
};

/// Fetches each URL, preserving input order. Failures are recorded per URL.
std::vector<FetchOutcome> fetch_all(const std::vector<std::string>& urls, const FetchOptions& options,
                                    unsigned jobs = 1);

/// Stable document id for a URL ("u" + 16 hex digits).
std::string document_id_for_url(const std::string& url);

}  // namespace lexzip

#include "lexzip/fetch.hpp"

#include <curl/curl.h>

#include <cstdio>
#include <memory>
#include <mutex>

#include "lexzip/error.hpp"
#include "lexzip/parallel.hpp"
#include "lexzip/rng.hpp"
#include "lexzip/url.hpp"

namespace lexzip {
namespace {

void ensure_curl_initialized() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

std::size_t append_body(char* data, std::size_t size, std::size_t nmemb, void* userdata) {
  auto* body = static_cast<std::string*>(userdata);
  body->append(data, size * nmemb);
  return size * nmemb;
}

struct CurlDeleter {
  void operator()(CURL* handle) const { curl_easy_cleanup(handle); }
};

}  // namespace

std::string document_id_for_url(const std::string& url) {
  Fnv1a h;
  h.update(url);
  char buf[18];
  std::snprintf(buf, sizeof buf, "u%016llx", static_cast<unsigned long long>(h.digest()));
  return buf;
}

WebDocument fetch_url(const std::string& url, const FetchOptions& options) {
  if (!is_absolute_http_url(url)) throw Error(ErrorCode::InvalidArgument, "not an absolute http(s) url: " + url);
  ensure_curl_initialized();
  std::unique_ptr<CURL, CurlDeleter> handle(curl_easy_init());
  if (!handle) throw Error(ErrorCode::NetworkError, "curl_easy_init failed");

  std::string body;
  char error_buffer[CURL_ERROR_SIZE] = {0};
  CURL* h = handle.get();
  curl_easy_setopt(h, CURLOPT_URL, url.c_str());
  curl_easy_setopt(h, CURLOPT_WRITEFUNCTION, append_body);
  curl_easy_setopt(h, CURLOPT_WRITEDATA, &body);
  curl_easy_setopt(h, CURLOPT_ERRORBUFFER, error_buffer);
  curl_easy_setopt(h, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(h, CURLOPT_MAXREDIRS, options.max_redirects);
  curl_easy_setopt(h, CURLOPT_TIMEOUT_MS, static_cast<long>(options.timeout.count()));
  curl_easy_setopt(h, CURLOPT_USERAGENT, options.user_agent.c_str());
  curl_easy_setopt(h, CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(h, CURLOPT_PROTOCOLS, static_cast<long>(CURLPROTO_HTTP | CURLPROTO_HTTPS));
  curl_easy_setopt(h, CURLOPT_REDIR_PROTOCOLS, static_cast<long>(CURLPROTO_HTTP | CURLPROTO_HTTPS));
  // Keep the body as sent; no transparent decoding of Content-Encoding.
  curl_easy_setopt(h, CURLOPT_HTTP_CONTENT_DECODING, 0L);

  const CURLcode rc = curl_easy_perform(h);
  if (rc != CURLE_OK) {
    const std::string detail = error_buffer[0] ? error_buffer : curl_easy_strerror(rc);
    throw Error(ErrorCode::NetworkError, url + ": " + detail);
  }
  long status = 0;
  curl_easy_getinfo(h, CURLINFO_RESPONSE_CODE, &status);
  if (status < 200 || status > 299) throw HttpError(status, url);
  if (body.empty()) throw Error(ErrorCode::EmptyBody, url);

  WebDocument doc;
  doc.id = document_id_for_url(url);
  doc.url = url;
  doc.label = Label::Unknown;
  doc.html = std::move(body);
  doc.fetched_at = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  doc.source = DocumentSource::Fetched;
  return doc;
}

std::vector<FetchOutcome> fetch_all(const std::vector<std::string>& urls, const FetchOptions& options,
                                    unsigned jobs) {
  std::vector<FetchOutcome> outcomes(urls.size());
  parallel_for(urls.size(), jobs, [&](std::size_t i) {
    outcomes[i].url = urls[i];
    try {
      outcomes[i].document = fetch_url(urls[i], options);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });
  return outcomes;
}

}  // namespace lexzip

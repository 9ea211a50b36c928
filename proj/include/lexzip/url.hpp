#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace lexzip {

/// A parsed URL reference. Hierarchical URLs ("http://host/path") carry an
/// authority; opaque ones ("mailto:x", "javascript:...") keep everything after
/// the colon in `path` and have `has_authority == false`.
struct Url {
  std::string scheme;  // lowercase, without ':'
  bool has_authority = false;
  std::string host;    // lowercase
  std::string port;    // digits only, may be empty
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;

  std::string to_string() const;
  bool is_http() const { return scheme == "http" || scheme == "https"; }
};

/// Parses an absolute URL (must carry a scheme). Surrounding ASCII whitespace
/// is ignored. Returns nullopt for anything malformed.
std::optional<Url> parse_url(std::string_view text);

/// True iff `text` parses as an absolute http(s) URL with a non-empty host.
bool is_absolute_http_url(std::string_view text);

/// Resolves a (possibly relative) reference against an absolute base URL.
std::optional<Url> resolve_url(const Url& base, std::string_view reference);

/// Registrable domain ("eTLD+1") of a host using an embedded public-suffix
/// subset. IP literals and single-label hosts are returned unchanged.
std::string registrable_domain(std::string_view host);

}  // namespace lexzip

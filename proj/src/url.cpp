#include "lexzip/url.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <vector>

namespace lexzip {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Returns the scheme length (excluding ':') or 0 when `s` has no scheme.
std::size_t scheme_length(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == ':') return i;
    if (!std::isalnum(c) && c != '+' && c != '-' && c != '.') return 0;
  }
  return 0;
}

bool valid_host(std::string_view host) {
  if (host.empty()) return false;
  if (host.front() == '[') return host.back() == ']' && host.size() > 2;
  for (char c : host) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '-' || c == '.' || c == '_' || u >= 0x80)) return false;
  }
  return host.front() != '.' || host.size() > 1;
}

// Splits "path?query#fragment" into the Url fields.
void split_tail(std::string_view rest, Url& url) {
  if (auto hash = rest.find('#'); hash != std::string_view::npos) {
    url.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  if (auto q = rest.find('?'); q != std::string_view::npos) {
    url.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  url.path = std::string(rest);
}

bool parse_authority(std::string_view authority, Url& url) {
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  std::string_view host = authority;
  std::string_view port;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return false;
    host = authority.substr(0, close + 1);
    auto after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') return false;
      port = after.substr(1);
    }
  } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }
  if (!std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
  if (!valid_host(host)) return false;
  url.host = lower(host);
  url.port = std::string(port);
  url.has_authority = true;
  return true;
}

std::string remove_dot_segments(std::string_view path) {
  std::vector<std::string_view> out;
  const bool absolute = !path.empty() && path.front() == '/';
  std::size_t pos = absolute ? 1 : 0;
  bool trailing_slash = false;
  while (pos <= path.size()) {
    auto next = path.find('/', pos);
    if (next == std::string_view::npos) next = path.size();
    const auto segment = path.substr(pos, next - pos);
    trailing_slash = false;
    if (segment == ".") {
      trailing_slash = true;
    } else if (segment == "..") {
      if (!out.empty()) out.pop_back();
      trailing_slash = true;
    } else {
      out.push_back(segment);
    }
    pos = next + 1;
  }
  std::string result = absolute ? "/" : "";
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) result += '/';
    result += out[i];
  }
  if (trailing_slash && (result.empty() || result.back() != '/')) result += '/';
  return result;
}

// Multi-label public suffixes seen most often in phishing and top-site lists.
// Anything not listed falls back to "last label is the suffix".
constexpr std::array<std::string_view, 64> kMultiLabelSuffixes = {
    "co.uk",  "org.uk", "ac.uk",  "gov.uk", "ltd.uk", "plc.uk", "me.uk",  "net.uk",
    "com.au", "net.au", "org.au", "edu.au", "gov.au", "asn.au", "id.au",  "co.nz",
    "org.nz", "net.nz", "govt.nz", "co.jp", "ne.jp",  "or.jp",  "ac.jp",  "go.jp",
    "com.br", "net.br", "org.br", "gov.br", "com.cn", "net.cn", "org.cn", "gov.cn",
    "co.in",  "net.in", "org.in", "gov.in", "ac.in",  "co.za",  "org.za", "gov.za",
    "com.mx", "org.mx", "gob.mx", "com.ar", "com.tr", "gov.tr", "com.sg", "edu.sg",
    "com.hk", "com.tw", "co.kr",  "or.kr",  "com.my", "com.ph", "com.vn", "co.id",
    "or.id",  "ac.id",  "com.ng", "com.pk", "com.sa", "com.eg", "co.il",  "com.ua",
};

bool is_ip_literal(std::string_view host) {
  if (!host.empty() && host.front() == '[') return true;
  return !host.empty() &&
         std::all_of(host.begin(), host.end(), [](char c) { return (c >= '0' && c <= '9') || c == '.'; });
}

}  // namespace

std::string Url::to_string() const {
  std::string out = scheme + ":";
  if (has_authority) {
    out += "//" + host;
    if (!port.empty()) out += ":" + port;
  }
  out += path;
  if (query) out += "?" + *query;
  if (fragment) out += "#" + *fragment;
  return out;
}

std::optional<Url> parse_url(std::string_view text) {
  text = trim(text);
  const auto slen = scheme_length(text);
  if (slen == 0) return std::nullopt;
  Url url;
  url.scheme = lower(text.substr(0, slen));
  std::string_view rest = text.substr(slen + 1);
  if (rest.substr(0, 2) == "//") {
    rest.remove_prefix(2);
    const auto end = rest.find_first_of("/?#");
    const auto authority = rest.substr(0, end);
    if (!parse_authority(authority, url)) return std::nullopt;
    rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
    split_tail(rest, url);
    url.path = remove_dot_segments(url.path);
    if (url.path.empty()) url.path = "/";
  } else {
    if (url.is_http()) return std::nullopt;  // "http:foo" is not a usable absolute URL
    split_tail(rest, url);
  }
  if (std::any_of(url.path.begin(), url.path.end(), [](char c) { return c == ' ' || c == '\n'; })) {
    return std::nullopt;
  }
  return url;
}

bool is_absolute_http_url(std::string_view text) {
  auto url = parse_url(text);
  return url && url->is_http() && url->has_authority && !url->host.empty();
}

std::optional<Url> resolve_url(const Url& base, std::string_view reference) {
  reference = trim(reference);
  if (scheme_length(reference) > 0) return parse_url(reference);
  if (!base.has_authority) return std::nullopt;

  Url out;
  out.scheme = base.scheme;
  if (reference.substr(0, 2) == "//") {
    return parse_url(base.scheme + ":" + std::string(reference));
  }
  out.has_authority = true;
  out.host = base.host;
  out.port = base.port;
  if (reference.empty()) {
    out.path = base.path;
    out.query = base.query;
    return out;
  }
  Url tail;
  split_tail(reference, tail);
  out.fragment = tail.fragment;
  if (tail.path.empty()) {
    out.path = base.path;
    out.query = tail.query ? tail.query : base.query;
  } else {
    if (tail.path.front() == '/') {
      out.path = remove_dot_segments(tail.path);
    } else {
      const auto slash = base.path.rfind('/');
      const std::string dir = slash == std::string::npos ? "/" : base.path.substr(0, slash + 1);
      out.path = remove_dot_segments(dir + tail.path);
    }
    out.query = tail.query;
  }
  if (std::any_of(out.path.begin(), out.path.end(), [](char c) { return c == ' ' || c == '\n'; })) {
    return std::nullopt;
  }
  return out;
}

std::string registrable_domain(std::string_view host) {
  std::string h = lower(host);
  while (!h.empty() && h.back() == '.') h.pop_back();
  if (is_ip_literal(h)) return h;
  const auto last_dot = h.rfind('.');
  if (last_dot == std::string::npos) return h;

  std::size_t suffix_labels = 1;
  for (auto suffix : kMultiLabelSuffixes) {
    if (h.size() > suffix.size() && h.compare(h.size() - suffix.size(), suffix.size(), suffix) == 0 &&
        h[h.size() - suffix.size() - 1] == '.') {
      suffix_labels = 2;
      break;
    }
    if (h == suffix) return h;
  }
  // Walk back over suffix_labels + 1 labels.
  std::size_t pos = h.size();
  for (std::size_t i = 0; i < suffix_labels + 1; ++i) {
    if (pos == 0) return h;
    const auto dot = h.rfind('.', pos - 1);
    if (dot == std::string::npos) return h;
    pos = dot;
  }
  return h.substr(pos + 1);
}

}  // namespace lexzip

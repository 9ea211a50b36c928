#include "lexzip/label.hpp"

namespace lexzip {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Phishing: return "phishing";
    case Label::NonPhishing: return "non_phishing";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "phishing" || text == "phish") return Label::Phishing;
  if (text == "non_phishing" || text == "legit" || text == "nonphishing") return Label::NonPhishing;
  if (text == "unknown") return Label::Unknown;
  return std::nullopt;
}

}  // namespace lexzip

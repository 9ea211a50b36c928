#pragma once

#include <optional>
#include <string_view>

namespace lexzip {

enum class Label { Phishing, NonPhishing, Unknown };

/// Canonical wire names: "phishing", "non_phishing", "unknown".
std::string_view to_string(Label label);

/// Accepts the wire names plus the CLI shorthands "phish" and "legit".
std::optional<Label> parse_label(std::string_view text);

inline bool is_known(Label label) { return label != Label::Unknown; }

}  // namespace lexzip

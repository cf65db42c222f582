#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "prove/backend.hpp"
#include "prove/core.hpp"

namespace prove {

// Curator-chosen preferred labels, keyed by component id. Components without
// an entry use their main label.
struct LabelPolicy {
  std::map<std::string, std::string, std::less<>> overrides;

  // Reads `component_id<TAB>alias` lines. Blank lines and lines starting with
  // '#' are skipped.
  static LabelPolicy load(const std::filesystem::path& path);
  static LabelPolicy parse(std::string_view text);
};

// Throws kOverrideNotAnAlias when an override names neither an alias nor the
// main label of its component.
LabelTriple select_labels(const Triple& t, const LabelPolicy& policy);

// "<subject>'s <predicate> is <object>."
std::string template_sentence(const LabelTriple& labels);
Verbalisation template_verbalise(const LabelTriple& labels);

// Asks the backend for a sentence. If the backend cannot be reached
// (kUnavailable, kTimeout, kOffline) the template sentence is used instead;
// protocol errors propagate.
Verbalisation verbalise(const LabelTriple& labels, ScorerBackend& backend);

enum class DatePrecision { kDay, kMonth, kYear };

// Renders an ISO-8601 style timestamp ("+1796-03-23T00:00:00Z", "1796-03",
// "1796") as "23 March 1796", "March 1796" or "1796". Without an explicit
// precision, zeroed month/day fields select the coarser form. Strings that do
// not parse as a date are returned unchanged.
std::string format_datetime(std::string_view value,
                            std::optional<DatePrecision> precision = std::nullopt);

// Quantity amounts lose a leading '+'; a unit label, when given, follows the
// amount.
std::string format_quantity(std::string_view amount, std::string_view unit = {});

// Object label as it should enter label selection for the given datatype.
std::string display_value(std::string_view raw, ObjectDatatype datatype);

}  // namespace prove

#include "prove/verbalisation.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace prove {

LabelPolicy LabelPolicy::parse(std::string_view text) {
  LabelPolicy policy;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size()) {
      fail(ErrorCode::kSchemaError,
           "label override line " + std::to_string(line_no) + ": expected id<TAB>alias");
    }
    policy.overrides[std::string(line.substr(0, tab))] = std::string(line.substr(tab + 1));
  }
  return policy;
}

LabelPolicy LabelPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open label override file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

namespace {

std::string preferred_label(const TripleComponent& c, const LabelPolicy& policy) {
  auto it = policy.overrides.find(c.id);
  if (it == policy.overrides.end()) return c.main_label;
  if (it->second != c.main_label && !c.has_alias(it->second)) {
    fail(ErrorCode::kOverrideNotAnAlias,
         "override '" + it->second + "' is not a label of component '" + c.id + "'");
  }
  return it->second;
}

bool all_present(const LabelTriple& labels) {
  return !labels.subject.empty() && !labels.predicate.empty() && !labels.object.empty();
}

}  // namespace

LabelTriple select_labels(const Triple& t, const LabelPolicy& policy) {
  return {preferred_label(t.subject, policy), preferred_label(t.predicate, policy),
          preferred_label(t.object, policy)};
}

std::string template_sentence(const LabelTriple& labels) {
  return labels.subject + "'s " + labels.predicate + " is " + labels.object + ".";
}

Verbalisation template_verbalise(const LabelTriple& labels) {
  require(all_present(labels), "verbalisation labels must be non-empty");
  return {template_sentence(labels), labels, VerbalisationOrigin::kTemplate};
}

Verbalisation verbalise(const LabelTriple& labels, ScorerBackend& backend) {
  require(all_present(labels), "verbalisation labels must be non-empty");
  try {
    return {call_verbalise(backend, labels), labels, VerbalisationOrigin::kBackend};
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kUnavailable:
      case ErrorCode::kTimeout:
      case ErrorCode::kOffline:
        return template_verbalise(labels);
      default:
        throw;
    }
  }
}

namespace {

constexpr std::array<std::string_view, 12> kMonths = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::string format_datetime(std::string_view value, std::optional<DatePrecision> precision) {
  std::string_view s = value;
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (auto t = s.find('T'); t != std::string_view::npos) s = s.substr(0, t);

  int year = 0, month = 0, day = 0;
  const auto d1 = s.find('-');
  if (!parse_int(s.substr(0, d1), year)) return std::string(value);
  if (d1 != std::string_view::npos) {
    const auto rest = s.substr(d1 + 1);
    const auto d2 = rest.find('-');
    if (!parse_int(rest.substr(0, d2), month)) return std::string(value);
    if (d2 != std::string_view::npos && !parse_int(rest.substr(d2 + 1), day)) {
      return std::string(value);
    }
  }
  if (month < 0 || month > 12 || day < 0 || day > 31) return std::string(value);

  DatePrecision p = DatePrecision::kYear;
  if (month > 0) p = day > 0 ? DatePrecision::kDay : DatePrecision::kMonth;
  if (precision) {
    // An explicit precision can only coarsen what the value carries.
    p = std::max(p, *precision);
  }

  std::string year_text = std::to_string(year);
  if (negative) year_text += " BC";
  switch (p) {
    case DatePrecision::kDay:
      return std::to_string(day) + " " + std::string(kMonths[month - 1]) + " " + year_text;
    case DatePrecision::kMonth:
      return std::string(kMonths[month - 1]) + " " + year_text;
    case DatePrecision::kYear:
      return year_text;
  }
  return year_text;
}

std::string format_quantity(std::string_view amount, std::string_view unit) {
  if (!amount.empty() && amount.front() == '+') amount.remove_prefix(1);
  std::string out(amount);
  if (!unit.empty()) {
    out += ' ';
    out += unit;
  }
  return out;
}

std::string display_value(std::string_view raw, ObjectDatatype datatype) {
  switch (datatype) {
    case ObjectDatatype::kDatetime:
      return format_datetime(raw);
    case ObjectDatatype::kQuantity: {
      // "+12 metre" style values carry their unit after the first space.
      const auto space = raw.find(' ');
      if (space == std::string_view::npos) return format_quantity(raw);
      return format_quantity(raw.substr(0, space), raw.substr(space + 1));
    }
    default:
      return std::string(raw);
  }
}

}  // namespace prove

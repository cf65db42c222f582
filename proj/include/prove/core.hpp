#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prove/error.hpp"

namespace prove {

// Stance classes. The enumerator order is also the argmax tie-break order:
// on equal values the lower index wins.
enum class Stance { kSupp = 0, kRef = 1, kNei = 2 };

inline constexpr std::array<Stance, 3> kStances = {Stance::kSupp, Stance::kRef,
                                                   Stance::kNei};

std::string_view stance_name(Stance s);
Stance parse_stance(std::string_view name);

// Index of the largest value; ties go to the lowest index (SUPP > REF > NEI).
Stance argmax_stance(const std::array<double, 3>& values);

struct TripleComponent {
  std::string id;
  std::string main_label;
  std::vector<std::string> aliases;
  std::optional<std::string> description;

  bool has_alias(std::string_view text) const;
  // Throws kInvalidArgument on empty main_label or duplicate/self aliases.
  void check() const;

  bool operator==(const TripleComponent&) const = default;
};

enum class ObjectDatatype {
  kEntity,
  kString,
  kQuantity,
  kDatetime,
  // Non-verbalisable kinds, kept so that validation can reject them.
  kUrl,
  kGlobeCoordinate,
  kExternalId,
  kImage,
};

std::string_view datatype_name(ObjectDatatype d);
ObjectDatatype parse_datatype(std::string_view name);
bool is_verbalisable(ObjectDatatype d);

struct Triple {
  std::string id;
  TripleComponent subject;
  TripleComponent predicate;
  TripleComponent object;
  ObjectDatatype object_datatype = ObjectDatatype::kEntity;
};

// ok, or throws kUnverbalisableObject / kMissingLabel.
void validate_triple(const Triple& t);

struct UrlSource {
  std::string url;
};
struct DocumentSource {
  std::string text;
};

struct Reference {
  std::string id;
  std::variant<UrlSource, DocumentSource> source;
  std::optional<std::string> final_url;
  std::optional<std::string> html;
  std::optional<std::string> netloc;

  bool is_url() const { return std::holds_alternative<UrlSource>(source); }
};

enum class VerbalisationOrigin { kBackend, kTemplate, kOverride };

std::string_view origin_name(VerbalisationOrigin o);

struct LabelTriple {
  std::string subject;
  std::string predicate;
  std::string object;

  bool operator==(const LabelTriple&) const = default;
};

struct Verbalisation {
  std::string text;
  LabelTriple labels_used;
  VerbalisationOrigin origin = VerbalisationOrigin::kTemplate;
};

// A window of `window_size` consecutive segments starting at `start_index`.
struct Passage {
  std::string text;
  std::size_t window_size = 1;
  std::size_t start_index = 0;

  std::size_t end_index() const { return start_index + window_size - 1; }
  bool overlaps(const Passage& other) const {
    return start_index <= other.end_index() && other.start_index <= end_index();
  }
  bool operator==(const Passage&) const = default;
};

struct ScoredPassage {
  Passage passage;
  double relevance = 0.0;
};

// Probability distribution over {SUPP, REF, NEI}.
class StanceDistribution {
 public:
  static constexpr double kTolerance = 1e-6;

  StanceDistribution(double supp, double ref, double nei);
  static StanceDistribution from_array(const std::array<double, 3>& v) {
    return StanceDistribution(v[0], v[1], v[2]);
  }

  double supp() const { return values_[0]; }
  double ref() const { return values_[1]; }
  double nei() const { return values_[2]; }
  double operator[](Stance s) const { return values_[static_cast<int>(s)]; }
  const std::array<double, 3>& values() const { return values_; }
  Stance argmax() const { return argmax_stance(values_); }

  static bool is_valid(const std::array<double, 3>& v);

 private:
  std::array<double, 3> values_;
};

struct Evidence {
  ScoredPassage scored;
  StanceDistribution stance;
  std::size_t length_chars = 0;
};

// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

Evidence make_evidence(ScoredPassage scored, StanceDistribution stance);

enum class Aggregator { kWeightedSum, kMalon, kClassifier };

std::string_view aggregator_name(Aggregator a);
Aggregator parse_aggregator(std::string_view name);

struct AggregateResult {
  std::array<double, 3> class_values{};
  Stance final_class = Stance::kNei;
  double support_probability = 0.0;
  // Weighted sum only: class values divided by their total (all zero when the
  // total is zero).
  std::optional<std::array<double, 3>> normalized_values;
};

struct VerdictReport {
  Aggregator aggregator = Aggregator::kWeightedSum;
  AggregateResult result;
  std::vector<Evidence> evidence;

  Stance final_class() const { return result.final_class; }
  double support_probability() const { return result.support_probability; }
};

}  // namespace prove

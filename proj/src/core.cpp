#include "prove/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace prove {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnverbalisableObject: return "UnverbalisableObject";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kOverrideNotAnAlias: return "OverrideNotAnAlias";
    case ErrorCode::kBackendProtocol: return "BackendProtocolError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kUnavailable: return "Unavailable";
    case ErrorCode::kNotHtml: return "NotHtml";
    case ErrorCode::kOffline: return "Offline";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kNotTrained: return "NotTrained";
    case ErrorCode::kSingleClassDataset: return "SingleClassDataset";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kSingleClassLabels: return "SingleClassLabels";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

std::string_view stance_name(Stance s) {
  switch (s) {
    case Stance::kSupp: return "SUPP";
    case Stance::kRef: return "REF";
    case Stance::kNei: return "NEI";
  }
  return "NEI";
}

Stance parse_stance(std::string_view name) {
  if (name == "SUPP" || name == "SUPPORTS") return Stance::kSupp;
  if (name == "REF" || name == "REFUTES") return Stance::kRef;
  if (name == "NEI" || name == "NOT ENOUGH INFO") return Stance::kNei;
  fail(ErrorCode::kInvalidArgument, "unknown stance '" + std::string(name) + "'");
}

Stance argmax_stance(const std::array<double, 3>& values) {
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (values[k] > values[best]) best = k;
  }
  return static_cast<Stance>(best);
}

bool TripleComponent::has_alias(std::string_view text) const {
  return std::find(aliases.begin(), aliases.end(), text) != aliases.end();
}

void TripleComponent::check() const {
  if (main_label.empty()) {
    fail(ErrorCode::kMissingLabel, "component '" + id + "' has an empty main label");
  }
  std::set<std::string_view> seen;
  for (const auto& alias : aliases) {
    require(alias != main_label,
            "component '" + id + "' lists its main label as an alias");
    require(seen.insert(alias).second,
            "component '" + id + "' has duplicate alias '" + alias + "'");
  }
}

std::string_view datatype_name(ObjectDatatype d) {
  switch (d) {
    case ObjectDatatype::kEntity: return "entity";
    case ObjectDatatype::kString: return "string";
    case ObjectDatatype::kQuantity: return "quantity";
    case ObjectDatatype::kDatetime: return "datetime";
    case ObjectDatatype::kUrl: return "url";
    case ObjectDatatype::kGlobeCoordinate: return "globe-coordinate";
    case ObjectDatatype::kExternalId: return "external-id";
    case ObjectDatatype::kImage: return "image";
  }
  return "entity";
}

ObjectDatatype parse_datatype(std::string_view name) {
  // Accept the Wikidata spellings alongside the short names.
  if (name == "entity" || name == "wikibase-item") return ObjectDatatype::kEntity;
  if (name == "string" || name == "monolingualtext") return ObjectDatatype::kString;
  if (name == "quantity") return ObjectDatatype::kQuantity;
  if (name == "datetime" || name == "time") return ObjectDatatype::kDatetime;
  if (name == "url") return ObjectDatatype::kUrl;
  if (name == "globe-coordinate") return ObjectDatatype::kGlobeCoordinate;
  if (name == "external-id") return ObjectDatatype::kExternalId;
  if (name == "image" || name == "commonsMedia") return ObjectDatatype::kImage;
  fail(ErrorCode::kInvalidArgument, "unknown object datatype '" + std::string(name) + "'");
}

bool is_verbalisable(ObjectDatatype d) {
  switch (d) {
    case ObjectDatatype::kEntity:
    case ObjectDatatype::kString:
    case ObjectDatatype::kQuantity:
    case ObjectDatatype::kDatetime:
      return true;
    default:
      return false;
  }
}

void validate_triple(const Triple& t) {
  if (!is_verbalisable(t.object_datatype)) {
    fail(ErrorCode::kUnverbalisableObject,
         "object of triple '" + t.id + "' has unverbalisable type " +
             std::string(datatype_name(t.object_datatype)));
  }
  for (const auto* c : {&t.subject, &t.predicate, &t.object}) c->check();
}

std::string_view origin_name(VerbalisationOrigin o) {
  switch (o) {
    case VerbalisationOrigin::kBackend: return "backend";
    case VerbalisationOrigin::kTemplate: return "template";
    case VerbalisationOrigin::kOverride: return "override";
  }
  return "template";
}

bool StanceDistribution::is_valid(const std::array<double, 3>& v) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= kTolerance;
}

StanceDistribution::StanceDistribution(double supp, double ref, double nei)
    : values_{supp, ref, nei} {
  require(is_valid(values_), "stance probabilities must lie in [0,1] and sum to 1");
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

Evidence make_evidence(ScoredPassage scored, StanceDistribution stance) {
  const std::size_t length = utf8_length(scored.passage.text);
  return Evidence{std::move(scored), stance, length};
}

std::string_view aggregator_name(Aggregator a) {
  switch (a) {
    case Aggregator::kWeightedSum: return "weighted_sum";
    case Aggregator::kMalon: return "malon";
    case Aggregator::kClassifier: return "classifier";
  }
  return "weighted_sum";
}

Aggregator parse_aggregator(std::string_view name) {
  if (name == "weighted_sum") return Aggregator::kWeightedSum;
  if (name == "malon") return Aggregator::kMalon;
  if (name == "classifier") return Aggregator::kClassifier;
  fail(ErrorCode::kInvalidArgument, "unknown aggregator '" + std::string(name) + "'");
}

}  // namespace prove

#pragma once

#include <string>

#include <json.hpp>

#include "prove/core.hpp"
#include "prove/metrics.hpp"
#include "prove/pipeline.hpp"
#include "prove/verification.hpp"

namespace prove {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVerdictSchema = "prove.verdict/1";
inline constexpr const char* kExtractSchema = "prove.extract/1";
inline constexpr const char* kCrossValSchema = "prove.crossval/1";

// {"id", "label", "aliases": [...], "description"}. Objects whose datatype is
// a date or quantity may give "value" instead of "label"; it is rendered with
// display_value(). Errors: kSchemaError naming the offending field.
TripleComponent component_from_json(const Json& j, const std::string& path,
                                    ObjectDatatype datatype = ObjectDatatype::kEntity);
Json component_to_json(const TripleComponent& c);

// {"id", "subject", "predicate", "object", "object_datatype"}.
Triple triple_from_json(const Json& j);
Json triple_to_json(const Triple& t);
Triple load_triple(const std::string& path);

Json stance_json(const std::array<double, 3>& values);
Json evidence_json(const Evidence& e, std::size_t rank);
Json aggregate_json(Aggregator a, const AggregateResult& r);

// Full verdict report for one pair. Evidence is listed once, since every
// aggregator works on the same evidence set.
Json verdict_json(const Triple& triple, const Reference& reference, const PipelineOutput& out);

Json extraction_json(const Reference& reference, const Extraction& e);

Json metrics_json(const MetricsReport& m);
Json crossval_json(const CrossValReport& r);

// Two-decimal human summary of a verdict report.
std::string verdict_summary(const PipelineOutput& out);

}  // namespace prove

#include "prove/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "prove/verbalisation.hpp"

namespace prove {

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::kSchemaError, path + ": " + what);
}

const Json& member(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema_fail(path + "." + key, "missing");
  return *it;
}

std::optional<std::string> optional_string(const Json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema_fail(path + "." + key, "expected a string");
  return it->get<std::string>();
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

TripleComponent component_from_json(const Json& j, const std::string& path,
                                    ObjectDatatype datatype) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  TripleComponent c;
  c.id = optional_string(j, "id", path).value_or("");
  if (auto label = optional_string(j, "label", path)) {
    c.main_label = *label;
  } else if (auto value = optional_string(j, "value", path)) {
    c.main_label = display_value(*value, datatype);
  } else {
    schema_fail(path + ".label", "missing");
  }
  if (auto it = j.find("aliases"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) schema_fail(path + ".aliases", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_string()) {
        schema_fail(path + ".aliases[" + std::to_string(i) + "]", "expected a string");
      }
      c.aliases.push_back((*it)[i].get<std::string>());
    }
  }
  c.description = optional_string(j, "description", path);
  return c;
}

Json component_to_json(const TripleComponent& c) {
  Json j;
  j["id"] = c.id;
  j["label"] = c.main_label;
  j["aliases"] = c.aliases;
  if (c.description) j["description"] = *c.description;
  return j;
}

Triple triple_from_json(const Json& j) {
  if (!j.is_object()) schema_fail("triple", "expected an object");
  Triple t;
  t.id = optional_string(j, "id", "triple").value_or("");
  if (auto d = optional_string(j, "object_datatype", "triple")) {
    try {
      t.object_datatype = parse_datatype(*d);
    } catch (const Error&) {
      schema_fail("triple.object_datatype", "unknown datatype '" + *d + "'");
    }
  }
  t.subject = component_from_json(member(j, "subject", "triple"), "triple.subject");
  t.predicate = component_from_json(member(j, "predicate", "triple"), "triple.predicate");
  t.object = component_from_json(member(j, "object", "triple"), "triple.object", t.object_datatype);
  return t;
}

Json triple_to_json(const Triple& t) {
  Json j;
  j["id"] = t.id;
  j["subject"] = component_to_json(t.subject);
  j["predicate"] = component_to_json(t.predicate);
  j["object"] = component_to_json(t.object);
  j["object_datatype"] = std::string(datatype_name(t.object_datatype));
  return j;
}

Triple load_triple(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open triple file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kSchemaError, path + ": " + e.what());
  }
  return triple_from_json(j);
}

Json stance_json(const std::array<double, 3>& values) {
  Json j;
  for (Stance s : kStances) j[std::string(stance_name(s))] = values[static_cast<int>(s)];
  return j;
}

Json evidence_json(const Evidence& e, std::size_t rank) {
  const Passage& p = e.scored.passage;
  Json j;
  j["rank"] = rank;
  j["text"] = p.text;
  j["window_size"] = p.window_size;
  j["start_index"] = p.start_index;
  j["end_index"] = p.end_index();
  j["relevance"] = e.scored.relevance;
  j["stance"] = stance_json(e.stance.values());
  j["length_chars"] = e.length_chars;
  return j;
}

Json aggregate_json(Aggregator a, const AggregateResult& r) {
  Json j;
  j["aggregator"] = std::string(aggregator_name(a));
  j["final_class"] = std::string(stance_name(r.final_class));
  j["support_probability"] = r.support_probability;
  j["class_values"] = stance_json(r.class_values);
  if (r.normalized_values) j["normalized_values"] = stance_json(*r.normalized_values);
  return j;
}

namespace {

Json reference_json(const Reference& reference) {
  Json j;
  j["id"] = reference.id;
  if (const auto* url = std::get_if<UrlSource>(&reference.source)) {
    j["kind"] = "url";
    j["url"] = url->url;
    if (reference.final_url) j["final_url"] = *reference.final_url;
  } else {
    j["kind"] = "document";
  }
  return j;
}

}  // namespace

Json verdict_json(const Triple& triple, const Reference& reference, const PipelineOutput& out) {
  Json j;
  j["schema"] = kVerdictSchema;
  j["triple"] = triple_to_json(triple);
  j["reference"] = reference_json(reference);
  j["verbalisation"] = {{"text", out.verbalisation.text},
                        {"origin", std::string(origin_name(out.verbalisation.origin))},
                        {"labels",
                         {{"subject", out.verbalisation.labels_used.subject},
                          {"predicate", out.verbalisation.labels_used.predicate},
                          {"object", out.verbalisation.labels_used.object}}}};
  j["passages"] = {{"segments", out.extraction.segments.size()},
                   {"candidates", out.extraction.passages.size()},
                   {"after_dedup", out.pstar.size()},
                   {"all_irrelevant", out.all_irrelevant()}};
  Json evidence = Json::array();
  if (!out.verdicts.empty()) {
    const auto& items = out.verdicts.front().evidence;
    for (std::size_t i = 0; i < items.size(); ++i) evidence.push_back(evidence_json(items[i], i + 1));
  }
  j["evidence"] = std::move(evidence);
  Json results = Json::array();
  for (const auto& v : out.verdicts) results.push_back(aggregate_json(v.aggregator, v.result));
  j["results"] = std::move(results);
  return j;
}

Json extraction_json(const Reference& reference, const Extraction& e) {
  Json j;
  j["schema"] = kExtractSchema;
  j["reference"] = reference_json(reference);
  Json segments = Json::array();
  for (std::size_t i = 0; i < e.segments.size(); ++i) {
    segments.push_back({{"index", i}, {"text", e.segments.segments[i]}});
  }
  j["segments"] = std::move(segments);
  Json passages = Json::array();
  for (const auto& p : e.passages) {
    passages.push_back({{"window_size", p.window_size},
                        {"start_index", p.start_index},
                        {"end_index", p.end_index()},
                        {"text", p.text}});
  }
  j["passages"] = std::move(passages);
  return j;
}

Json metrics_json(const MetricsReport& m) {
  Json j;
  j["count"] = m.count;
  j["accuracy"] = m.accuracy;
  Json classes = Json::array();
  for (const auto& c : m.per_class) {
    classes.push_back({{"class", c.name},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support}});
  }
  j["per_class"] = std::move(classes);
  j["macro"] = {{"precision", m.macro_precision}, {"recall", m.macro_recall}, {"f1", m.macro_f1}};
  j["weighted"] = {
      {"precision", m.weighted_precision}, {"recall", m.weighted_recall}, {"f1", m.weighted_f1}};
  j["confusion"] = m.confusion;
  j["auc"] = m.auc ? Json(*m.auc) : Json(nullptr);
  j["pearson_r"] = m.pearson_r ? Json(*m.pearson_r) : Json(nullptr);
  return j;
}

Json crossval_json(const CrossValReport& r) {
  Json j;
  j["schema"] = kCrossValSchema;
  j["folds"] = r.folds;
  j["seed"] = r.seed;
  j["mean"] = {{"ternary_accuracy", r.mean_ternary_accuracy},
               {"ternary_macro_f1", r.mean_ternary_macro_f1},
               {"binary_accuracy", r.mean_binary_accuracy},
               {"binary_macro_f1", r.mean_binary_macro_f1},
               {"binary_auc", r.mean_binary_auc ? Json(*r.mean_binary_auc) : Json(nullptr)}};
  Json folds = Json::array();
  for (const auto& f : r.per_fold) {
    folds.push_back({{"train_size", f.train_size},
                     {"test_size", f.test_size},
                     {"ternary", metrics_json(f.ternary)},
                     {"binary", metrics_json(f.binary)}});
  }
  j["per_fold"] = std::move(folds);
  return j;
}

std::string verdict_summary(const PipelineOutput& out) {
  std::ostringstream s;
  s << "claim: " << out.verbalisation.text << " (" << origin_name(out.verbalisation.origin)
    << ")\n";
  s << "passages: " << out.extraction.passages.size() << " candidates, " << out.pstar.size()
    << " after overlap removal\n";
  if (!out.verdicts.empty()) {
    const auto& items = out.verdicts.front().evidence;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& e = items[i];
      s << "  [" << i + 1 << "] rho=" << fixed2(e.scored.relevance) << " "
        << stance_name(e.stance.argmax()) << " " << e.scored.passage.text << "\n";
    }
  }
  for (const auto& v : out.verdicts) {
    s << aggregator_name(v.aggregator) << ": " << stance_name(v.final_class())
      << " y=" << fixed2(v.support_probability()) << "\n";
  }
  return s.str();
}

}  // namespace prove

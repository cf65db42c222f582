#include "prove/pipeline.hpp"

namespace prove {

namespace {

const Segmenter& segmenter_of(const PipelineConfig& config) {
  static const RuleSegmenter kDefault;
  return config.segmenter != nullptr ? *config.segmenter : kDefault;
}

Extraction from_text(std::string text, std::string final_url, const PipelineConfig& config) {
  Extraction out;
  out.final_url = std::move(final_url);
  out.text = std::move(text);
  out.segments = segmenter_of(config).segment(out.text);
  out.passages = window(out.segments, config.windows);
  return out;
}

}  // namespace

Extraction extract_stored(const Reference& reference, const PipelineConfig& config) {
  if (const auto* doc = std::get_if<DocumentSource>(&reference.source)) {
    return from_text(doc->text, {}, config);
  }
  if (!reference.html) {
    fail(ErrorCode::kUnavailable, "reference '" + reference.id + "' has no stored html");
  }
  const auto& url = std::get<UrlSource>(reference.source).url;
  return from_text(clean_html(*reference.html), reference.final_url.value_or(url), config);
}

Extraction extract(Reference& reference, const PipelineConfig& config) {
  if (reference.is_url() && !reference.html) {
    auto fetched = fetch(std::get<UrlSource>(reference.source).url, config.fetch);
    reference.final_url = std::move(fetched.final_url);
    reference.html = std::move(fetched.html);
  }
  return extract_stored(reference, config);
}

VerdictReport aggregate(Aggregator aggregator, const std::vector<Evidence>& evidence,
                        const FeatureVector& features, const AggregationModel* model) {
  VerdictReport report;
  report.aggregator = aggregator;
  report.evidence = evidence;
  if (aggregator == Aggregator::kClassifier) {
    if (model == nullptr) fail(ErrorCode::kNotTrained, "classifier aggregation needs a model");
    report.result = aggregate_classifier(features, *model);
    return report;
  }
  if (evidence.empty()) {
    report.result.final_class = Stance::kNei;
    report.result.support_probability = 0.0;
    if (aggregator == Aggregator::kWeightedSum) {
      report.result.normalized_values = std::array<double, 3>{0.0, 0.0, 0.0};
    }
    return report;
  }
  std::vector<double> rho;
  std::vector<StanceDistribution> sigma;
  for (const auto& e : evidence) {
    rho.push_back(e.scored.relevance);
    sigma.push_back(e.stance);
  }
  report.result = aggregator == Aggregator::kWeightedSum ? aggregate_weighted_sum(rho, sigma)
                                                         : aggregate_malon(sigma);
  return report;
}

PipelineOutput verify_extracted(const Triple& triple, Extraction extraction,
                                ScorerBackend& backend, const PipelineConfig& config,
                                const std::optional<std::string>& manual_verbalisation) {
  validate_triple(triple);
  for (Aggregator a : config.aggregators) {
    if (a == Aggregator::kClassifier && config.model == nullptr) {
      fail(ErrorCode::kNotTrained, "classifier aggregation needs a model");
    }
  }
  PipelineOutput out;
  const LabelTriple labels = select_labels(triple, config.labels);
  if (manual_verbalisation) {
    require(!manual_verbalisation->empty(), "manual verbalisation must not be empty");
    out.verbalisation = {*manual_verbalisation, labels, VerbalisationOrigin::kOverride};
  } else {
    out.verbalisation = verbalise(labels, backend);
  }
  out.extraction = std::move(extraction);

  std::vector<Evidence> evidence;
  if (!out.extraction.passages.empty()) {
    out.scored = score_passages(out.verbalisation, out.extraction.passages, backend);
    out.pstar = dedup_overlaps(out.scored);
    out.evidence = select_evidence(out.pstar, config.evidence_k);
    out.stances = stance_probs(out.verbalisation, out.evidence, backend);
    for (std::size_t i = 0; i < out.evidence.size(); ++i) {
      evidence.push_back(make_evidence(out.evidence.items[i], out.stances[i]));
    }
  }
  out.features = build_features(evidence);
  for (Aggregator a : config.aggregators) {
    if (a == Aggregator::kClassifier && evidence.empty()) {
      VerdictReport r;
      r.aggregator = a;
      r.result.final_class = Stance::kNei;
      out.verdicts.push_back(std::move(r));
      continue;
    }
    out.verdicts.push_back(aggregate(a, evidence, out.features, config.model));
  }
  return out;
}

PipelineOutput verify(const Triple& triple, Reference& reference, ScorerBackend& backend,
                      const PipelineConfig& config,
                      const std::optional<std::string>& manual_verbalisation) {
  validate_triple(triple);
  return verify_extracted(triple, extract(reference, config), backend, config,
                          manual_verbalisation);
}

}  // namespace prove

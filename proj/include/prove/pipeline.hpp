#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prove/backend.hpp"
#include "prove/core.hpp"
#include "prove/selection.hpp"
#include "prove/text_retrieval.hpp"
#include "prove/verbalisation.hpp"
#include "prove/verification.hpp"

namespace prove {

struct PipelineConfig {
  WindowConfig windows;
  std::size_t evidence_k = kDefaultEvidenceSize;
  LabelPolicy labels;
  FetchOptions fetch;
  std::vector<Aggregator> aggregators = {Aggregator::kClassifier};
  // Required when the classifier aggregator is requested.
  const AggregationModel* model = nullptr;
  // Defaults to the bundled rule-based segmenter.
  const Segmenter* segmenter = nullptr;
};

struct Extraction {
  std::string final_url;  // empty for documents
  std::string text;       // cleaned text fed to segmentation
  SegmentList segments;
  std::vector<Passage> passages;
};

// Documents go straight to segmentation; URL references use their stored
// html when present and are fetched otherwise (filling final_url and html).
Extraction extract(Reference& reference, const PipelineConfig& config);

// Same as extract() but never touches the network: a URL reference without
// stored html is an error (kUnavailable).
Extraction extract_stored(const Reference& reference, const PipelineConfig& config);

struct PipelineOutput {
  Verbalisation verbalisation;
  Extraction extraction;
  std::vector<ScoredPassage> scored;
  std::vector<ScoredPassage> pstar;
  EvidenceSet evidence;
  std::vector<StanceDistribution> stances;
  FeatureVector features;
  std::vector<VerdictReport> verdicts;  // one per requested aggregator

  bool all_irrelevant() const { return prove::all_irrelevant(scored); }
};

// Runs verbalisation, scoring, selection and verification on an already
// extracted reference. With no passages every verdict is NEI with y = 0 and
// the scoring backends are not called.
PipelineOutput verify_extracted(const Triple& triple, Extraction extraction,
                                ScorerBackend& backend, const PipelineConfig& config,
                                const std::optional<std::string>& manual_verbalisation = {});

// Full pipeline for one triple-reference pair.
PipelineOutput verify(const Triple& triple, Reference& reference, ScorerBackend& backend,
                      const PipelineConfig& config,
                      const std::optional<std::string>& manual_verbalisation = {});

// Verdict for one aggregator from evidence already scored for stance.
VerdictReport aggregate(Aggregator aggregator, const std::vector<Evidence>& evidence,
                        const FeatureVector& features, const AggregationModel* model);

}  // namespace prove

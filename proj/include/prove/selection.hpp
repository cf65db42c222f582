#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prove/backend.hpp"
#include "prove/core.hpp"

namespace prove {

inline constexpr std::size_t kDefaultEvidenceSize = 5;

// Ranked evidence candidates, at most k, in descending relevance.
struct EvidenceSet {
  std::vector<ScoredPassage> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

// One relevance score per passage, in input order. Requests are batched by
// the backend; contract violations raise kBackendProtocol.
std::vector<ScoredPassage> score_passages(const Verbalisation& v,
                                          std::span<const Passage> passages,
                                          ScorerBackend& backend);

// Ranking order: higher relevance first, then smaller start index, then
// smaller window. Returns true when a ranks before b.
bool ranks_before(const ScoredPassage& a, const ScoredPassage& b);

// Drops every passage that shares a segment index with a strictly more
// relevant passage. Each passage is judged against the full input, so the
// result does not depend on input order (beyond preserving it). Passages with
// equal scores never remove each other.
std::vector<ScoredPassage> dedup_overlaps(std::span<const ScoredPassage> scored);

// The k best passages under ranks_before. Shorter inputs are returned whole.
EvidenceSet select_evidence(std::span<const ScoredPassage> pstar,
                            std::size_t k = kDefaultEvidenceSize);

// True when every score is at most 0 (no likely relevant passage). Empty
// input counts as all-irrelevant.
bool all_irrelevant(std::span<const ScoredPassage> scored);

}  // namespace prove

#include "prove/selection.hpp"

#include <algorithm>

namespace prove {

std::vector<ScoredPassage> score_passages(const Verbalisation& v,
                                          std::span<const Passage> passages,
                                          ScorerBackend& backend) {
  require(!passages.empty(), "score_passages needs at least one passage");
  std::vector<std::string> texts;
  texts.reserve(passages.size());
  for (const auto& p : passages) texts.push_back(p.text);
  const auto scores = call_relevance(backend, v.text, texts);
  std::vector<ScoredPassage> out;
  out.reserve(passages.size());
  for (std::size_t i = 0; i < passages.size(); ++i) out.push_back({passages[i], scores[i]});
  return out;
}

bool ranks_before(const ScoredPassage& a, const ScoredPassage& b) {
  if (a.relevance != b.relevance) return a.relevance > b.relevance;
  if (a.passage.start_index != b.passage.start_index) {
    return a.passage.start_index < b.passage.start_index;
  }
  return a.passage.window_size < b.passage.window_size;
}

std::vector<ScoredPassage> dedup_overlaps(std::span<const ScoredPassage> scored) {
  // Sorting by span start lets each passage look only at the candidates that
  // can reach it.
  std::vector<std::size_t> order(scored.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].passage.start_index < scored[b].passage.start_index;
  });
  std::size_t widest = 0;
  for (const auto& s : scored) widest = std::max(widest, s.passage.window_size);

  std::vector<bool> dominated(scored.size(), false);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const auto& p = scored[order[oi]];
    // Only passages starting within `widest` indices before p can overlap it.
    std::size_t lo = oi;
    while (lo > 0 && scored[order[lo - 1]].passage.start_index + widest > p.passage.start_index) {
      --lo;
    }
    for (std::size_t oj = lo; oj < order.size(); ++oj) {
      const auto& q = scored[order[oj]];
      if (q.passage.start_index > p.passage.end_index()) break;
      if (oj != oi && q.passage.overlaps(p.passage) && q.relevance > p.relevance) {
        dominated[order[oi]] = true;
        break;
      }
    }
  }
  std::vector<ScoredPassage> out;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (!dominated[i]) out.push_back(scored[i]);
  }
  return out;
}

EvidenceSet select_evidence(std::span<const ScoredPassage> pstar, std::size_t k) {
  std::vector<ScoredPassage> ranked(pstar.begin(), pstar.end());
  const std::size_t keep = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                    ranked.end(), ranks_before);
  ranked.resize(keep);
  return EvidenceSet{std::move(ranked)};
}

bool all_irrelevant(std::span<const ScoredPassage> scored) {
  return std::all_of(scored.begin(), scored.end(),
                     [](const ScoredPassage& s) { return s.relevance <= 0.0; });
}

}  // namespace prove

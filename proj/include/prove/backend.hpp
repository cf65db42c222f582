#pragma once

#include <array>
#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prove/core.hpp"

namespace prove {

// Raw access to the three scoring models: the verbaliser, the passage
// relevance scorer and the stance (entailment) classifier. Implementations
// return whatever they computed; the call_* functions below enforce the
// output contract so that every backend is held to the same checks.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  virtual std::string name() const = 0;
  virtual std::string verbalise(const LabelTriple& labels) = 0;
  virtual std::vector<double> relevance(std::string_view claim,
                                        std::span<const std::string> passages) = 0;
  virtual std::vector<std::array<double, 3>> stance(
      std::string_view claim, std::span<const std::string> evidence) = 0;
};

// Non-empty sentence, else kBackendProtocol.
std::string call_verbalise(ScorerBackend& backend, const LabelTriple& labels);
// One score in [-1, 1] per passage, order preserved.
std::vector<double> call_relevance(ScorerBackend& backend, std::string_view claim,
                                   std::span<const std::string> passages);
// One normalised distribution per evidence text.
std::vector<StanceDistribution> call_stance(ScorerBackend& backend, std::string_view claim,
                                            std::span<const std::string> evidence);

// Deterministic lexical stand-ins for the three models. These exist so the
// pipeline runs hermetically; they make no accuracy claims.
//
//   relevance = 2 * Jaccard(tokens(claim), tokens(passage)) - 1
//   stance    = softmax(o * (1 - neg), o * neg, 1 - o)
//
// where o is the fraction of claim tokens found in the evidence and neg is 1
// when the evidence contains a negation token.
class BaselineBackend : public ScorerBackend {
 public:
  std::string name() const override { return "baseline"; }
  std::string verbalise(const LabelTriple& labels) override;
  std::vector<double> relevance(std::string_view claim,
                                std::span<const std::string> passages) override;
  std::vector<std::array<double, 3>> stance(std::string_view claim,
                                            std::span<const std::string> evidence) override;
};

// Lower-cased alphanumeric tokens; bytes >= 0x80 count as word characters so
// UTF-8 words stay whole.
std::vector<std::string> baseline_tokens(std::string_view text);
double jaccard(std::string_view a, std::string_view b);
bool contains_negation(std::string_view text);
double claim_coverage(std::string_view claim, std::string_view evidence);

struct RemoteConfig {
  std::string endpoint;  // e.g. http://localhost:8080 or http://host/prefix
  std::chrono::milliseconds timeout{30000};
  int max_in_flight = 4;
  std::size_t batch_limit = 64;
};

// JSON-over-HTTP client for the scoring service:
//   POST /verbalise {"subject","predicate","object"} -> {"verbalisation"}
//   POST /relevance {"claim","passages":[...]}       -> {"scores":[...]}
//   POST /stance    {"claim","evidence":[...]}       -> {"distributions":[[s,r,n],...]}
// Batches larger than batch_limit are split; up to max_in_flight requests run
// at once. Transport errors are retried once with jitter; protocol errors
// never are.
class RemoteBackend final : public ScorerBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  std::string name() const override { return "remote:" + config_.endpoint; }
  std::string verbalise(const LabelTriple& labels) override;
  std::vector<double> relevance(std::string_view claim,
                                std::span<const std::string> passages) override;
  std::vector<std::array<double, 3>> stance(std::string_view claim,
                                            std::span<const std::string> evidence) override;

  const RemoteConfig& config() const { return config_; }

 private:
  std::string post(const std::string& path, const std::string& body) const;

  RemoteConfig config_;
  std::string base_;    // scheme://host[:port]
  std::string prefix_;  // path prefix without trailing slash
};

struct BackendOptions {
  std::string endpoint;  // empty selects the baseline backend
  std::chrono::milliseconds timeout{30000};
  int max_in_flight = 4;
  bool offline = false;
};

// Remote endpoints are refused with kOffline when options.offline is set.
std::unique_ptr<ScorerBackend> make_backend(const BackendOptions& options);

}  // namespace prove

#include "prove/backend.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "prove/verbalisation.hpp"

namespace prove {

using nlohmann::json;

std::string call_verbalise(ScorerBackend& backend, const LabelTriple& labels) {
  require(!labels.subject.empty() && !labels.predicate.empty() && !labels.object.empty(),
          "verbalisation labels must be non-empty");
  std::string text = backend.verbalise(labels);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    fail(ErrorCode::kBackendProtocol, backend.name() + " returned an empty verbalisation");
  }
  return text;
}

std::vector<double> call_relevance(ScorerBackend& backend, std::string_view claim,
                                   std::span<const std::string> passages) {
  require(!passages.empty(), "relevance scoring needs at least one passage");
  auto scores = backend.relevance(claim, passages);
  if (scores.size() != passages.size()) {
    fail(ErrorCode::kBackendProtocol,
         backend.name() + " returned " + std::to_string(scores.size()) + " scores for " +
             std::to_string(passages.size()) + " passages");
  }
  for (double s : scores) {
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      fail(ErrorCode::kBackendProtocol,
           backend.name() + " returned relevance " + std::to_string(s) + " outside [-1, 1]");
    }
  }
  return scores;
}

std::vector<StanceDistribution> call_stance(ScorerBackend& backend, std::string_view claim,
                                            std::span<const std::string> evidence) {
  require(!evidence.empty(), "stance scoring needs at least one evidence text");
  auto rows = backend.stance(claim, evidence);
  if (rows.size() != evidence.size()) {
    fail(ErrorCode::kBackendProtocol,
         backend.name() + " returned " + std::to_string(rows.size()) + " distributions for " +
             std::to_string(evidence.size()) + " evidence texts");
  }
  std::vector<StanceDistribution> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!StanceDistribution::is_valid(row)) {
      fail(ErrorCode::kBackendProtocol, backend.name() + " returned a non-normalised distribution");
    }
    out.push_back(StanceDistribution::from_array(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Baseline

namespace {

const std::set<std::string, std::less<>>& negation_tokens() {
  static const std::set<std::string, std::less<>> kTokens = {
      "not",  "no",    "never", "none", "neither", "nor",    "cannot", "nothing",
      "nobody", "without", "isn", "wasn", "aren",  "weren",  "doesn", "didn",
      "don",  "won",   "hasn",  "haven", "hadn"};
  return kTokens;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::set<std::string> token_set(std::string_view text) {
  auto tokens = baseline_tokens(text);
  return {tokens.begin(), tokens.end()};
}

}  // namespace

std::vector<std::string> baseline_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double jaccard(std::string_view a, std::string_view b) {
  const auto sa = token_set(a);
  const auto sb = token_set(b);
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const std::size_t united = sa.size() + sb.size() - common;
  return united == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(united);
}

bool contains_negation(std::string_view text) {
  for (const auto& t : baseline_tokens(text)) {
    if (negation_tokens().contains(t)) return true;
  }
  return false;
}

double claim_coverage(std::string_view claim, std::string_view evidence) {
  std::set<std::string> claim_tokens;
  for (auto& t : baseline_tokens(claim)) {
    if (!negation_tokens().contains(t)) claim_tokens.insert(std::move(t));
  }
  if (claim_tokens.empty()) return 0.0;
  const auto ev = token_set(evidence);
  std::size_t found = 0;
  for (const auto& t : claim_tokens) found += ev.count(t);
  return static_cast<double>(found) / static_cast<double>(claim_tokens.size());
}

std::string BaselineBackend::verbalise(const LabelTriple& labels) {
  return template_sentence(labels);
}

std::vector<double> BaselineBackend::relevance(std::string_view claim,
                                               std::span<const std::string> passages) {
  std::vector<double> scores;
  scores.reserve(passages.size());
  for (const auto& p : passages) scores.push_back(2.0 * jaccard(claim, p) - 1.0);
  return scores;
}

std::vector<std::array<double, 3>> BaselineBackend::stance(std::string_view claim,
                                                           std::span<const std::string> evidence) {
  std::vector<std::array<double, 3>> rows;
  rows.reserve(evidence.size());
  for (const auto& e : evidence) {
    const double o = claim_coverage(claim, e);
    const double neg = contains_negation(e) ? 1.0 : 0.0;
    const std::array<double, 3> logits = {o * (1.0 - neg), o * neg, 1.0 - o};
    const double top = *std::max_element(logits.begin(), logits.end());
    std::array<double, 3> row{};
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
      row[k] = std::exp(logits[k] - top);
      total += row[k];
    }
    for (double& v : row) v /= total;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Remote

namespace {

bool is_transport_error(httplib::Error e) {
  switch (e) {
    case httplib::Error::Connection:
    case httplib::Error::Read:
    case httplib::Error::Write:
    case httplib::Error::ConnectionTimeout:
    case httplib::Error::SSLConnection:
      return true;
    default:
      return false;
  }
}

bool is_timeout(httplib::Error e) {
  return e == httplib::Error::Read || e == httplib::Error::ConnectionTimeout;
}

json parse_response(const std::string& body, const std::string& what) {
  try {
    auto parsed = json::parse(body);
    if (!parsed.is_object()) {
      fail(ErrorCode::kBackendProtocol, what + ": response is not a JSON object");
    }
    return parsed;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kBackendProtocol, what + ": malformed JSON response: " + e.what());
  }
}

template <typename Fn>
auto run_batched(std::size_t total, std::size_t batch_limit, int max_in_flight, Fn fn) {
  using Batch = decltype(fn(std::size_t{0}, std::size_t{0}));
  const std::size_t limit = std::max<std::size_t>(batch_limit, 1);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t begin = 0; begin < total; begin += limit) {
    ranges.emplace_back(begin, std::min(total, begin + limit));
  }
  std::vector<Batch> results(ranges.size());
  const std::size_t width = static_cast<std::size_t>(std::max(max_in_flight, 1));
  for (std::size_t wave = 0; wave < ranges.size(); wave += width) {
    const std::size_t end = std::min(ranges.size(), wave + width);
    if (end - wave == 1) {
      results[wave] = fn(ranges[wave].first, ranges[wave].second);
      continue;
    }
    std::vector<std::future<Batch>> inflight;
    for (std::size_t r = wave; r < end; ++r) {
      inflight.push_back(std::async(std::launch::async, fn, ranges[r].first, ranges[r].second));
    }
    for (std::size_t r = wave; r < end; ++r) results[r] = inflight[r - wave].get();
  }
  return results;
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  require(config_.timeout.count() > 0, "backend timeout must be positive");
  require(config_.max_in_flight >= 1, "backend max_in_flight must be at least 1");
  const auto scheme_end = config_.endpoint.find("://");
  require(scheme_end != std::string::npos, "backend endpoint must be an http(s) URL");
  const std::string scheme = config_.endpoint.substr(0, scheme_end);
  require(scheme == "http" || scheme == "https", "backend endpoint must be an http(s) URL");
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  base_ = config_.endpoint.substr(0, path_start);
  if (path_start != std::string::npos) {
    prefix_ = config_.endpoint.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

std::string RemoteBackend::post(const std::string& path, const std::string& body) const {
  const std::string what = "POST " + config_.endpoint + path;
  thread_local std::mt19937 jitter_rng{std::random_device{}()};
  for (int attempt = 0;; ++attempt) {
    httplib::Client client(base_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto res = client.Post(prefix_ + path, body, "application/json");
    if (!res) {
      const auto err = res.error();
      if (is_transport_error(err) && attempt == 0) {
        std::uniform_int_distribution<int> jitter(50, 150);
        std::this_thread::sleep_for(std::chrono::milliseconds(jitter(jitter_rng)));
        continue;
      }
      if (is_timeout(err)) {
        fail(ErrorCode::kTimeout, what + ": timed out after " +
                                      std::to_string(config_.timeout.count()) + " ms");
      }
      fail(ErrorCode::kUnavailable, what + ": " + httplib::to_string(err));
    }
    if (res->status == 503) fail(ErrorCode::kUnavailable, what + ": service unavailable (503)");
    if (res->status != 200) {
      fail(ErrorCode::kBackendProtocol, what + ": HTTP status " + std::to_string(res->status));
    }
    return res->body;
  }
}

std::string RemoteBackend::verbalise(const LabelTriple& labels) {
  json request = {{"subject", labels.subject},
                  {"predicate", labels.predicate},
                  {"object", labels.object}};
  auto response = parse_response(post("/verbalise", request.dump()), "/verbalise");
  auto it = response.find("verbalisation");
  if (it == response.end() || !it->is_string()) {
    fail(ErrorCode::kBackendProtocol, "/verbalise: missing string field 'verbalisation'");
  }
  return it->get<std::string>();
}

std::vector<double> RemoteBackend::relevance(std::string_view claim,
                                             std::span<const std::string> passages) {
  auto batches = run_batched(
      passages.size(), config_.batch_limit, config_.max_in_flight,
      [&](std::size_t begin, std::size_t end) {
        json request = {{"claim", claim},
                        {"passages", std::vector<std::string>(passages.begin() + begin,
                                                              passages.begin() + end)}};
        auto response = parse_response(post("/relevance", request.dump()), "/relevance");
        auto it = response.find("scores");
        if (it == response.end() || !it->is_array()) {
          fail(ErrorCode::kBackendProtocol, "/relevance: missing array field 'scores'");
        }
        std::vector<double> scores;
        for (const auto& v : *it) {
          if (!v.is_number()) fail(ErrorCode::kBackendProtocol, "/relevance: non-numeric score");
          scores.push_back(v.get<double>());
        }
        if (scores.size() != end - begin) {
          fail(ErrorCode::kBackendProtocol, "/relevance: score count does not match batch size");
        }
        return scores;
      });
  std::vector<double> out;
  for (auto& b : batches) out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<std::array<double, 3>> RemoteBackend::stance(std::string_view claim,
                                                         std::span<const std::string> evidence) {
  using Rows = std::vector<std::array<double, 3>>;
  auto batches = run_batched(
      evidence.size(), config_.batch_limit, config_.max_in_flight,
      [&](std::size_t begin, std::size_t end) -> Rows {
        json request = {{"claim", claim},
                        {"evidence", std::vector<std::string>(evidence.begin() + begin,
                                                              evidence.begin() + end)}};
        auto response = parse_response(post("/stance", request.dump()), "/stance");
        auto it = response.find("distributions");
        if (it == response.end() || !it->is_array()) {
          fail(ErrorCode::kBackendProtocol, "/stance: missing array field 'distributions'");
        }
        Rows rows;
        for (const auto& row : *it) {
          if (!row.is_array() || row.size() != 3) {
            fail(ErrorCode::kBackendProtocol, "/stance: each distribution must have 3 entries");
          }
          std::array<double, 3> values{};
          for (int k = 0; k < 3; ++k) {
            if (!row[k].is_number()) fail(ErrorCode::kBackendProtocol, "/stance: non-numeric value");
            values[k] = row[k].get<double>();
          }
          rows.push_back(values);
        }
        if (rows.size() != end - begin) {
          fail(ErrorCode::kBackendProtocol, "/stance: distribution count does not match batch size");
        }
        return rows;
      });
  Rows out;
  for (auto& b : batches) out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::unique_ptr<ScorerBackend> make_backend(const BackendOptions& options) {
  if (options.endpoint.empty()) return std::make_unique<BaselineBackend>();
  if (options.offline) {
    fail(ErrorCode::kOffline, "remote backend " + options.endpoint + " refused in offline mode");
  }
  RemoteConfig config;
  config.endpoint = options.endpoint;
  config.timeout = options.timeout;
  config.max_in_flight = options.max_in_flight;
  return std::make_unique<RemoteBackend>(std::move(config));
}

}  // namespace prove

#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "prove/backend.hpp"
#include "test_support.hpp"

using namespace prove;
using nlohmann::json;
using testing::error_code_of;

namespace {

// Minimal stand-in for the scoring service. Relevance scores encode the
// passage position so that batch reassembly order can be checked.
struct StubService {
  testing::LocalServer server;
  std::mutex mutex;
  std::vector<std::size_t> batch_sizes;
  std::atomic<int> inflight{0};
  std::atomic<int> peak{0};

  explicit StubService(const std::string& prefix = "") {
    auto& s = server.server();
    s.Post(prefix + "/verbalise", [](const httplib::Request& req, httplib::Response& res) {
      auto in = json::parse(req.body);
      json out = {{"verbalisation", "stub: " + in["subject"].get<std::string>() + " / " +
                                        in["predicate"].get<std::string>() + " / " +
                                        in["object"].get<std::string>()}};
      res.set_content(out.dump(), "application/json");
    });
    s.Post(prefix + "/relevance", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++inflight;
      int expected = peak.load();
      while (now > expected && !peak.compare_exchange_weak(expected, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      auto in = json::parse(req.body);
      json scores = json::array();
      for (const auto& p : in["passages"]) {
        scores.push_back(std::stoi(p.get<std::string>()) / 1000.0);
      }
      {
        std::lock_guard<std::mutex> lock(mutex);
        batch_sizes.push_back(in["passages"].size());
      }
      --inflight;
      res.set_content(json{{"scores", scores}}.dump(), "application/json");
    });
    s.Post(prefix + "/stance", [](const httplib::Request& req, httplib::Response& res) {
      auto in = json::parse(req.body);
      json rows = json::array();
      for (std::size_t i = 0; i < in["evidence"].size(); ++i) rows.push_back({0.7, 0.2, 0.1});
      res.set_content(json{{"distributions", rows}}.dump(), "application/json");
    });
    server.start();
  }
};

RemoteBackend remote(const std::string& endpoint, int timeout_ms = 2000) {
  RemoteConfig cfg;
  cfg.endpoint = endpoint;
  cfg.timeout = std::chrono::milliseconds(timeout_ms);
  return RemoteBackend(cfg);
}

// Backend returning whatever it is told to, for contract checks.
struct ScriptedBackend : ScorerBackend {
  std::string sentence = "ok.";
  std::vector<double> scores;
  std::vector<std::array<double, 3>> rows;
  std::string name() const override { return "scripted"; }
  std::string verbalise(const LabelTriple&) override { return sentence; }
  std::vector<double> relevance(std::string_view, std::span<const std::string>) override {
    return scores;
  }
  std::vector<std::array<double, 3>> stance(std::string_view,
                                            std::span<const std::string>) override {
    return rows;
  }
};

std::vector<double> baseline_relevance(std::string_view claim, std::vector<std::string> passages) {
  BaselineBackend b;
  return call_relevance(b, claim, passages);
}

StanceDistribution baseline_stance(std::string_view claim, std::string evidence) {
  BaselineBackend b;
  std::vector<std::string> ev{std::move(evidence)};
  return call_stance(b, claim, ev).front();
}

}  // namespace

TEST_CASE("baseline tokens are lower-cased alphanumeric runs") {
  CHECK(baseline_tokens("Hello, World! 42x") == std::vector<std::string>{"hello", "world", "42x"});
  CHECK(baseline_tokens("Zürich's café") == std::vector<std::string>{"zürich", "s", "café"});
  CHECK(baseline_tokens("  ").empty());
}

TEST_CASE("baseline relevance is 2 * Jaccard - 1") {
  CHECK(baseline_relevance("Paris is in France", {"paris is in france"}).front() == 1.0);
  CHECK(baseline_relevance("Paris is in France", {"Tokyo hosts sumo"}).front() == -1.0);
  // {a, b} and {b, c}: one shared token out of three.
  CHECK(baseline_relevance("a b", {"b c"}).front() == doctest::Approx(-1.0 / 3).epsilon(1e-12));
  // {x, y, z, w} and {x, y, q}: 2 shared out of 5.
  CHECK(baseline_relevance("x y z w", {"X. Y? q"}).front() ==
        doctest::Approx(2.0 * 2.0 / 5.0 - 1.0).epsilon(1e-12));
}

TEST_CASE("baseline relevance is case-insensitive and deterministic") {
  const auto a = baseline_relevance("James Billington", {"JAMES BILLINGTON served", "x"});
  const auto b = baseline_relevance("james billington", {"james billington SERVED", "x"});
  CHECK(a == b);
  CHECK(baseline_relevance("a b", {"b c"}) == baseline_relevance("a b", {"b c"}));
}

TEST_CASE("baseline stance follows the softmax formula") {
  // Full coverage, no negation: logits (1, 0, 0).
  const auto supp = baseline_stance("Paris is the capital of France",
                                    "Paris is the capital of France.");
  const double z = std::exp(1.0) + 2.0;
  CHECK(supp.supp() == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));
  CHECK(supp.ref() == doctest::Approx(1.0 / z).epsilon(1e-12));
  CHECK(supp.argmax() == Stance::kSupp);

  const auto ref = baseline_stance("Paris is the capital of France",
                                   "Paris is not the capital of France.");
  CHECK(ref.argmax() == Stance::kRef);
  CHECK(ref.ref() == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));

  const auto nei = baseline_stance("Paris is the capital of France", "Tokyo hosts sumo.");
  CHECK(nei.argmax() == Stance::kNei);
  CHECK(nei.nei() == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));
}

TEST_CASE("negation detection uses whole tokens") {
  CHECK(contains_negation("He did not go"));
  CHECK(contains_negation("It wasn't there"));
  CHECK_FALSE(contains_negation("Nothingham knotted notes"));
  CHECK(claim_coverage("a b c d", "a b") == 0.5);
  CHECK(claim_coverage("", "a") == 0.0);
}

TEST_CASE("contract checks reject malformed backend output") {
  ScriptedBackend b;
  const LabelTriple labels{"A", "child", "B"};
  std::vector<std::string> two{"x", "y"};

  b.sentence = "  ";
  CHECK(error_code_of([&] { call_verbalise(b, labels); }) == ErrorCode::kBackendProtocol);
  b.sentence = "A has child B.";
  CHECK(call_verbalise(b, labels) == "A has child B.");
  CHECK(error_code_of([&] { call_verbalise(b, {"A", "", "B"}); }) ==
        ErrorCode::kInvalidArgument);

  b.scores = {0.5};
  CHECK(error_code_of([&] { call_relevance(b, "c", two); }) == ErrorCode::kBackendProtocol);
  b.scores = {0.5, 1.5};
  CHECK(error_code_of([&] { call_relevance(b, "c", two); }) == ErrorCode::kBackendProtocol);
  b.scores = {0.5, std::nan("")};
  CHECK(error_code_of([&] { call_relevance(b, "c", two); }) == ErrorCode::kBackendProtocol);
  b.scores = {-1.0, 1.0};
  CHECK(call_relevance(b, "c", two) == std::vector<double>{-1.0, 1.0});

  b.rows = {{0.5, 0.5, 0.5}, {1, 0, 0}};
  CHECK(error_code_of([&] { call_stance(b, "c", two); }) == ErrorCode::kBackendProtocol);
  b.rows = {{1, 0, 0}};
  CHECK(error_code_of([&] { call_stance(b, "c", two); }) == ErrorCode::kBackendProtocol);
  b.rows = {{1, 0, 0}, {0, 0, 1}};
  CHECK(call_stance(b, "c", two).size() == 2);
}

TEST_CASE("remote backend talks the JSON protocol") {
  StubService stub;
  auto b = remote(stub.server.url());
  CHECK(call_verbalise(b, {"Librarian of Congress", "position holder", "James H. Billington"}) ==
        "stub: Librarian of Congress / position holder / James H. Billington");
  std::vector<std::string> passages{"100", "250", "900"};
  CHECK(call_relevance(b, "claim", passages) == std::vector<double>{0.1, 0.25, 0.9});
  const auto rows = call_stance(b, "claim", passages);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].supp() == 0.7);
}

TEST_CASE("remote backend honours a path prefix") {
  StubService stub("/v1");
  auto b = remote(stub.server.url("/v1/"));
  CHECK(call_verbalise(b, {"A", "child", "B"}) == "stub: A / child / B");
}

TEST_CASE("remote batches above the limit are split and reassembled in order") {
  StubService stub;
  RemoteConfig cfg;
  cfg.endpoint = stub.server.url();
  cfg.max_in_flight = 3;
  RemoteBackend b(cfg);
  std::vector<std::string> passages;
  std::vector<double> expected;
  for (int i = 0; i < 200; ++i) {
    passages.push_back(std::to_string(i));
    expected.push_back(i / 1000.0);
  }
  CHECK(call_relevance(b, "claim", passages) == expected);
  std::vector<std::size_t> sizes = stub.batch_sizes;
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{8, 64, 64, 64});
  CHECK(stub.peak.load() <= 3);
  CHECK(stub.peak.load() >= 2);
}

TEST_CASE("remote protocol violations surface as protocol errors") {
  testing::LocalServer server;
  server.server().Post("/verbalise", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"text":"wrong field"})", "application/json");
  });
  server.server().Post("/relevance", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"scores":[0.1]})", "application/json");
  });
  server.server().Post("/stance", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "application/json");
  });
  server.start();
  auto b = remote(server.url());
  std::vector<std::string> two{"a", "b"};
  CHECK(error_code_of([&] { call_verbalise(b, {"A", "p", "B"}); }) ==
        ErrorCode::kBackendProtocol);
  CHECK(error_code_of([&] { call_relevance(b, "c", two); }) == ErrorCode::kBackendProtocol);
  CHECK(error_code_of([&] { call_stance(b, "c", two); }) == ErrorCode::kBackendProtocol);
}

TEST_CASE("remote backend maps 503 to unavailable and other statuses to protocol errors") {
  testing::LocalServer server;
  server.server().Post("/verbalise", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  server.server().Post("/relevance", [](const httplib::Request&, httplib::Response& res) {
    res.status = 413;
  });
  server.start();
  auto b = remote(server.url());
  std::vector<std::string> one{"a"};
  CHECK(error_code_of([&] { call_verbalise(b, {"A", "p", "B"}); }) == ErrorCode::kUnavailable);
  CHECK(error_code_of([&] { call_relevance(b, "c", one); }) == ErrorCode::kBackendProtocol);
}

TEST_CASE("remote backend times out") {
  testing::LocalServer server;
  server.server().Post("/verbalise", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"verbalisation":"late"})", "application/json");
  });
  server.start();
  auto b = remote(server.url(), 150);
  const auto start = std::chrono::steady_clock::now();
  CHECK(error_code_of([&] { call_verbalise(b, {"A", "p", "B"}); }) == ErrorCode::kTimeout);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::milliseconds(1500));
}

TEST_CASE("remote transport failures are retried once") {
  testing::LocalServer server;
  std::atomic<int> calls{0};
  server.server().Post("/verbalise", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.set_content(R"({"verbalisation":"fine"})", "application/json");
  });
  server.start();
  auto b = remote(server.url());
  CHECK(call_verbalise(b, {"A", "p", "B"}) == "fine");
  CHECK(calls.load() == 1);

  // Nothing listens on this port once the server is gone.
  std::string dead;
  {
    testing::LocalServer gone;
    gone.start();
    dead = gone.url();
  }
  auto unreachable = remote(dead, 300);
  CHECK(error_code_of([&] { call_verbalise(unreachable, {"A", "p", "B"}); }) ==
        ErrorCode::kUnavailable);
}

TEST_CASE("remote configuration is validated") {
  CHECK(error_code_of([] { remote("ftp://host"); }) == ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { remote("http://host", 0); }) == ErrorCode::kInvalidArgument);
  RemoteConfig cfg;
  cfg.endpoint = "http://host";
  cfg.max_in_flight = 0;
  CHECK(error_code_of([&] { RemoteBackend b(cfg); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("make_backend selects the baseline or refuses remote endpoints offline") {
  CHECK(make_backend({})->name() == "baseline");
  BackendOptions opts;
  opts.endpoint = "http://127.0.0.1:9";
  opts.offline = true;
  CHECK(error_code_of([&] { make_backend(opts); }) == ErrorCode::kOffline);
  opts.offline = false;
  CHECK(make_backend(opts)->name() == "remote:http://127.0.0.1:9");
}

TEST_CASE("baseline and remote backends are interchangeable under the contract") {
  StubService stub;
  auto r = remote(stub.server.url());
  BaselineBackend base;
  std::vector<std::string> passages{"1", "2", "3"};
  for (ScorerBackend* b : {static_cast<ScorerBackend*>(&r), static_cast<ScorerBackend*>(&base)}) {
    CHECK_NOTHROW(call_verbalise(*b, {"A", "p", "B"}));
    CHECK(call_relevance(*b, "claim 1", passages).size() == 3);
    CHECK(call_stance(*b, "claim 1", passages).size() == 3);
  }
}

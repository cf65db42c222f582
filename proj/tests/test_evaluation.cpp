#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "prove/evaluation.hpp"
#include "test_support.hpp"

using namespace prove;
using testing::error_code_of;

namespace {

WtrDataset five() { return load_wtr(testing::fixture("wtr/five_records.jsonl")); }

int recount_tie(const std::vector<int>& votes) {
  std::array<int, 4> c{};
  for (int v : votes) ++c[static_cast<std::size_t>(v)];
  const bool substantive = c[0] + c[1] + c[2] > 0;
  const int top = substantive ? std::max({c[0], c[1], c[2]}) : c[3];
  int holders = 0;
  for (int k = 0; k < (substantive ? 3 : 4); ++k) holders += c[static_cast<std::size_t>(k)] == top;
  return holders > 1 ? 1 : 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Loading

TEST_CASE("the five-record fixture loads completely") {
  const auto d = five();
  REQUIRE(d.records.size() == 5);
  CHECK(d.duplicates_dropped == 0);
  const auto& r = d.records[0];
  CHECK(r.reference_id == "R1");
  CHECK(r.subject.main_label == "Librarian of Congress");
  CHECK(r.property.aliases == std::vector<std::string>{"position holder"});
  CHECK(r.author_label == AuthorLabel::k1A);
  CHECK(r.t1.size() == 2);
  REQUIRE(r.t2.has_value());
  CHECK(r.t2->votes.votes.size() == 5);
  CHECK(r.t2->votes.votes[0].worker_id == "WR1t20");
  CHECK(r.html.has_value());
  CHECK_FALSE(d.records[4].html.has_value());
  CHECK(d.records[3].t2->votes.tie_break == 2);
  CHECK(r.triple().object.main_label == "James H. Billington");
  CHECK(r.reference().html == r.html);
}

TEST_CASE("records duplicating an earlier verbalisation and final URL are dropped") {
  const auto d = load_wtr(testing::fixture("wtr/with_duplicate.jsonl"));
  CHECK(d.records.size() == 3);
  CHECK(d.duplicates_dropped == 1);
  CHECK(d.records[1].reference_id == "R2");
  CHECK(d.records[2].reference_id == "R3");
}

TEST_CASE("unknown vote codes are schema errors with a location") {
  try {
    load_wtr(testing::fixture("wtr/unknown_vote_code.jsonl"));
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchemaError);
    const std::string what = e.what();
    CHECK(what.rfind("line 3: ", 0) == 0);
    CHECK(what.find("t2.votes[2].code") != std::string::npos);
  }
}

TEST_CASE("an empty file yields no records") {
  const auto d = load_wtr(testing::fixture("wtr/empty.jsonl"));
  CHECK(d.records.empty());
  CHECK(d.duplicates_dropped == 0);
  std::istringstream header_only("{\"format\":\"prove-wtr\",\"version\":1}\n\n");
  CHECK(parse_wtr(header_only).records.empty());
}

TEST_CASE("dataset headers and required fields are checked") {
  std::istringstream wrong_format("{\"format\":\"other\",\"version\":1}\n");
  CHECK(error_code_of([&] { parse_wtr(wrong_format); }) == ErrorCode::kSchemaError);
  std::istringstream wrong_version("{\"format\":\"prove-wtr\",\"version\":2}\n");
  CHECK(error_code_of([&] { parse_wtr(wrong_version); }) == ErrorCode::kSchemaError);
  std::istringstream bad_json("{\"format\":\"prove-wtr\",\"version\":1}\n{oops\n");
  CHECK(error_code_of([&] { parse_wtr(bad_json); }) == ErrorCode::kSchemaError);
  std::istringstream missing(
      "{\"format\":\"prove-wtr\",\"version\":1}\n{\"claim\":{},\"author_label\":\"1A\"}\n");
  try {
    parse_wtr(missing);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2: reference") == 0);
  }
  CHECK(error_code_of([] { load_wtr("/nonexistent/data.jsonl"); }) == ErrorCode::kIo);
}

TEST_CASE("load, write and load again gives identical records") {
  const auto d = five();
  std::stringstream buffer;
  write_wtr(buffer, d.records);
  const auto again = parse_wtr(buffer);
  CHECK(again.records == d.records);
  const auto path = std::filesystem::temp_directory_path() / "prove_wtr_roundtrip.jsonl";
  save_wtr(path, d.records);
  CHECK(load_wtr(path).records == d.records);
  std::filesystem::remove(path);
}

// ---------------------------------------------------------------------------
// Votes and labels

TEST_CASE("majority vote examples") {
  const auto tie = majority_vote(std::vector<int>{0, 0, 2, 2, 1});
  CHECK(tie.tie);
  CHECK(tie.label == kVoteSupp);
  const auto clear = majority_vote(std::vector<int>{0, 0, 0, 2, 1});
  CHECK_FALSE(clear.tie);
  CHECK(clear.label == kVoteSupp);
  const auto unsure = majority_vote(std::vector<int>{3, 3, 3, 2});
  CHECK(unsure.label == kVoteNei);
  CHECK_FALSE(unsure.tie);
  const auto only_unsure = majority_vote(std::vector<int>{3, 3});
  CHECK(only_unsure.label == kVoteNotSure);
  CHECK(error_code_of([] { majority_vote(std::vector<int>{}); }) == ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { majority_vote(std::vector<int>{4}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("majority vote is permutation invariant and tie counts match a recount") {
  std::mt19937 rng(61);
  int ties = 0, recounted = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<int> votes;
    const std::size_t n = 1 + rng() % 7;
    for (std::size_t i = 0; i < n; ++i) votes.push_back(static_cast<int>(rng() % 4));
    const auto r = majority_vote(votes);
    for (int p = 0; p < 5; ++p) {
      std::shuffle(votes.begin(), votes.end(), rng);
      const auto q = majority_vote(votes);
      CHECK(q.label == r.label);
      CHECK(q.tie == r.tie);
    }
    ties += r.tie ? 1 : 0;
    recounted += recount_tie(votes);
  }
  CHECK(ties == recounted);
}

TEST_CASE("resolve_votes applies tie-breaks and stored aggregates") {
  auto set = [](std::vector<int> codes) {
    VoteSet v;
    for (int c : codes) v.votes.push_back(Vote{"w", "a", c, 1.0, std::nullopt});
    return v;
  };
  CHECK(resolve_votes(set({0, 0, 1})) == Stance::kSupp);
  auto tied = set({0, 0, 2, 2});
  CHECK_FALSE(resolve_votes(tied).has_value());
  tied.tie_break = kVoteNei;
  CHECK(resolve_votes(tied) == Stance::kNei);
  CHECK_FALSE(resolve_votes(set({3, 3})).has_value());
  VoteSet stored;
  stored.aggregated = kVoteRef;
  CHECK(resolve_votes(stored) == Stance::kRef);
  CHECK_FALSE(resolve_votes(VoteSet{}).has_value());
}

TEST_CASE("author labels map to ternary and binary classes") {
  CHECK(map_author_label(AuthorLabel::k1D, Task::kTernary) == static_cast<int>(Stance::kSupp));
  CHECK(map_author_label(AuthorLabel::k1A, Task::kBinary) == 0);
  CHECK(map_author_label(AuthorLabel::k2A, Task::kBinary) == 1);
  CHECK(map_author_label(AuthorLabel::k2A, Task::kTernary) == static_cast<int>(Stance::kRef));
  CHECK(map_author_label(AuthorLabel::k2B, Task::kTernary) == static_cast<int>(Stance::kNei));
  CHECK(binary_of(Stance::kSupp) == 0);
  CHECK(binary_of(Stance::kRef) == 1);
  CHECK(binary_of(Stance::kNei) == 1);
  CHECK(parse_author_label("1.A.") == AuthorLabel::k1A);
  CHECK(parse_author_label("2B") == AuthorLabel::k2B);
  CHECK(author_label_name(AuthorLabel::k1C) == "1C");
  CHECK(error_code_of([] { parse_author_label("3A"); }) == ErrorCode::kInvalidArgument);
}

// ---------------------------------------------------------------------------
// Pipeline evaluation

TEST_CASE("evaluating the fixture gives a complete bundle without network") {
  const auto d = five();
  BaselineBackend backend;
  EvaluationConfig cfg;
  cfg.pipeline.fetch.offline = true;
  cfg.forest.num_trees = 10;
  cfg.folds = 2;
  const auto b = evaluate_pipeline(d.records, backend, cfg);
  CHECK(b.records == 5);
  CHECK(b.failed == 1);
  REQUIRE(b.outcomes.size() == 5);
  CHECK(b.outcomes[4].error.has_value());
  CHECK(b.outcomes[3].t2_label == Stance::kNei);
  CHECK(b.outcomes[3].t2_status == "ok");
  for (std::size_t i = 0; i < 4; ++i) {
    CAPTURE(i);
    CHECK_FALSE(b.outcomes[i].error.has_value());
    CHECK(b.outcomes[i].weighted_sum.has_value());
    CHECK(b.outcomes[i].malon.has_value());
    CHECK(b.outcomes[i].passages > 0);
  }
  CHECK(b.all_irrelevant_fraction.has_value());
  CHECK(b.t2_fleiss_kappa.has_value());
  CHECK_FALSE(b.metrics.empty());
  for (const auto& m : b.metrics) {
    CHECK(m.metrics.accuracy >= 0.0);
    CHECK(m.metrics.accuracy <= 1.0);
  }
  const auto json = evaluation_json(b);
  CHECK(json["schema"] == kEvaluationSchema);
  CHECK(evaluation_tables(b).find("weighted_sum") != std::string::npos);
  const std::string csv = evaluation_csv(b);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("evaluation is deterministic and independent of the job count") {
  const auto d = five();
  BaselineBackend backend;
  EvaluationConfig cfg;
  cfg.forest.num_trees = 10;
  cfg.folds = 2;
  cfg.seed = 7;
  const auto a = evaluation_json(evaluate_pipeline(d.records, backend, cfg)).dump();
  cfg.jobs = 4;
  const auto b = evaluation_json(evaluate_pipeline(d.records, backend, cfg)).dump();
  CHECK(a == b);
}

TEST_CASE("a supplied model is used for every classifier slot") {
  const auto d = five();
  BaselineBackend backend;
  const auto model = AggregationModel::constant({0.2, 0.7, 0.1});
  EvaluationConfig cfg;
  cfg.model = &model;
  const auto b = evaluate_pipeline(d.records, backend, cfg);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(b.outcomes[i].classifier_t2.has_value());
    CHECK(b.outcomes[i].classifier_t2->final_class == Stance::kRef);
    CHECK(b.outcomes[i].classifier_author->support_probability == doctest::Approx(0.2));
  }
}

TEST_CASE("training sets pair features with labels") {
  const auto d = five();
  BaselineBackend backend;
  const auto t2 = collect_training_set(d.records, backend, PipelineConfig{}, LabelSource::kT2, 2);
  CHECK(t2.samples.size() == 4);
  CHECK(t2.skipped == 1);
  const auto author =
      collect_training_set(d.records, backend, PipelineConfig{}, LabelSource::kAuthor, 1);
  REQUIRE(author.samples.size() == 4);
  CHECK(author.samples[2].label == Stance::kRef);
  CHECK(author.record_index == std::vector<std::size_t>{0, 1, 2, 3});
}

#include <doctest.h>

#include <algorithm>
#include <random>

#include "prove/core.hpp"
#include "test_support.hpp"

using namespace prove;
using testing::error_code_of;

namespace {

TripleComponent component(std::string id, std::string label, std::vector<std::string> aliases = {}) {
  return TripleComponent{std::move(id), std::move(label), std::move(aliases), std::nullopt};
}

Triple librarian() {
  Triple t;
  t.id = "fig1";
  t.subject = component("Q1500535", "Librarian of Congress");
  t.predicate = component("P1308", "officeholder", {"position holder"});
  t.object = component("Q1361548", "James H. Billington");
  return t;
}

}  // namespace

TEST_CASE("validate_triple accepts an entity triple with labels") {
  CHECK_NOTHROW(validate_triple(librarian()));
}

TEST_CASE("validate_triple rejects unverbalisable object types") {
  for (auto d : {ObjectDatatype::kImage, ObjectDatatype::kUrl, ObjectDatatype::kGlobeCoordinate,
                 ObjectDatatype::kExternalId}) {
    Triple t = librarian();
    t.object_datatype = d;
    CHECK(error_code_of([&] { validate_triple(t); }) == ErrorCode::kUnverbalisableObject);
  }
  for (auto d : {ObjectDatatype::kString, ObjectDatatype::kQuantity, ObjectDatatype::kDatetime}) {
    Triple t = librarian();
    t.object_datatype = d;
    CHECK_NOTHROW(validate_triple(t));
  }
}

TEST_CASE("validate_triple rejects an empty main label") {
  Triple t = librarian();
  t.predicate.main_label.clear();
  CHECK(error_code_of([&] { validate_triple(t); }) == ErrorCode::kMissingLabel);
}

TEST_CASE("component aliases may not repeat or restate the main label") {
  CHECK(error_code_of([] { component("Q1", "A", {"B", "B"}).check(); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { component("Q1", "A", {"A"}).check(); }) ==
        ErrorCode::kInvalidArgument);
  CHECK_NOTHROW(component("Q1", "A", {"B", "C"}).check());
  CHECK(component("Q1", "A", {"B"}).has_alias("B"));
  CHECK_FALSE(component("Q1", "A", {"B"}).has_alias("A"));
}

TEST_CASE("datatype names round-trip and accept the Wikidata spellings") {
  for (auto d : {ObjectDatatype::kEntity, ObjectDatatype::kString, ObjectDatatype::kQuantity,
                 ObjectDatatype::kDatetime, ObjectDatatype::kUrl, ObjectDatatype::kGlobeCoordinate,
                 ObjectDatatype::kExternalId, ObjectDatatype::kImage}) {
    CHECK(parse_datatype(datatype_name(d)) == d);
  }
  CHECK(parse_datatype("wikibase-item") == ObjectDatatype::kEntity);
  CHECK(parse_datatype("commonsMedia") == ObjectDatatype::kImage);
  CHECK(parse_datatype("time") == ObjectDatatype::kDatetime);
  CHECK(error_code_of([] { parse_datatype("lexeme"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("stance distributions must be normalised") {
  CHECK_NOTHROW(StanceDistribution(0.2, 0.3, 0.5));
  CHECK_NOTHROW(StanceDistribution(1.0 / 3, 1.0 / 3, 1.0 / 3));
  CHECK_NOTHROW(StanceDistribution(0.5, 0.5, 1e-7));
  CHECK(error_code_of([] { StanceDistribution(0.5, 0.5, 0.5); }) == ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { StanceDistribution(1.2, -0.2, 0.0); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { StanceDistribution(0.5, 0.5, 2e-6); }) ==
        ErrorCode::kInvalidArgument);
  CHECK_FALSE(StanceDistribution::is_valid({std::nan(""), 0.5, 0.5}));
}

TEST_CASE("random valid distributions are accepted, perturbed ones rejected") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    double a = unit(rng), b = unit(rng), c = unit(rng);
    const double total = a + b + c;
    a /= total;
    b /= total;
    c /= total;
    CHECK(StanceDistribution::is_valid({a, b, c}));
    CHECK_FALSE(StanceDistribution::is_valid({a + 1e-3, b, c}));
  }
}

TEST_CASE("argmax ties follow SUPP > REF > NEI") {
  CHECK(argmax_stance({1.0 / 3, 1.0 / 3, 1.0 / 3}) == Stance::kSupp);
  CHECK(argmax_stance({0.2, 0.4, 0.4}) == Stance::kRef);
  CHECK(argmax_stance({0.4, 0.2, 0.4}) == Stance::kSupp);
  CHECK(argmax_stance({0.1, 0.2, 0.7}) == Stance::kNei);
  CHECK(argmax_stance({0.0, 0.0, 0.0}) == Stance::kSupp);
}

TEST_CASE("stance and aggregator names round-trip") {
  for (auto s : kStances) CHECK(parse_stance(stance_name(s)) == s);
  CHECK(stance_name(Stance::kSupp) == "SUPP");
  CHECK(stance_name(Stance::kRef) == "REF");
  CHECK(stance_name(Stance::kNei) == "NEI");
  for (auto a : {Aggregator::kWeightedSum, Aggregator::kMalon, Aggregator::kClassifier}) {
    CHECK(parse_aggregator(aggregator_name(a)) == a);
  }
}

TEST_CASE("passage spans and overlap") {
  Passage a{"a b", 2, 0};
  Passage b{"b", 1, 1};
  Passage c{"c", 1, 2};
  CHECK(a.end_index() == 1);
  CHECK(a.end_index() - a.start_index + 1 == a.window_size);
  CHECK(a.overlaps(b));
  CHECK(b.overlaps(a));
  CHECK_FALSE(a.overlaps(c));
  CHECK(c.overlaps(c));
}

TEST_CASE("evidence length counts code points") {
  CHECK(utf8_length("") == 0);
  CHECK(utf8_length("abc") == 3);
  CHECK(utf8_length("Zürich") == 6);
  CHECK(utf8_length("\xE2\x80\x9Cq\xE2\x80\x9D") == 3);
  const Evidence e = make_evidence(ScoredPassage{Passage{"Ærø é", 1, 0}, 0.5},
                                   StanceDistribution(1, 0, 0));
  CHECK(e.length_chars == 5);
}

TEST_CASE("references distinguish URLs from documents") {
  Reference url{"r1", UrlSource{"https://example.org"}, std::nullopt, std::nullopt, std::nullopt};
  Reference doc{"r2", DocumentSource{"A is B."}, std::nullopt, std::nullopt, std::nullopt};
  CHECK(url.is_url());
  CHECK_FALSE(doc.is_url());
  CHECK_FALSE(url.final_url.has_value());
  CHECK_FALSE(doc.html.has_value());
}

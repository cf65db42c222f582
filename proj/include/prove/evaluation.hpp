#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prove/backend.hpp"
#include "prove/core.hpp"
#include "prove/json_io.hpp"
#include "prove/metrics.hpp"
#include "prove/pipeline.hpp"
#include "prove/verification.hpp"

namespace prove {

inline constexpr const char* kWtrFormat = "prove-wtr";
inline constexpr int kWtrVersion = 1;
inline constexpr const char* kEvaluationSchema = "prove.evaluation/1";

// Crowd vote codes.
inline constexpr int kVoteSupp = 0;
inline constexpr int kVoteRef = 1;
inline constexpr int kVoteNei = 2;
inline constexpr int kVoteNotSure = 3;

enum class AuthorLabel { k1A, k1B, k1C, k1D, k2A, k2B };

std::string_view author_label_name(AuthorLabel l);  // "1A" ...
AuthorLabel parse_author_label(std::string_view name);  // accepts "1A" and "1.A."

struct Vote {
  std::string worker_id;
  std::string assignment_id;
  int code = kVoteNei;
  double seconds = 0.0;
  std::optional<std::string> not_sure_reason;

  bool operator==(const Vote&) const = default;
};

struct VoteSet {
  std::vector<Vote> votes;
  std::optional<int> aggregated;  // as stored in the dataset
  std::optional<int> tie_break;   // author decision for tied votes

  bool operator==(const VoteSet&) const = default;
};

struct T1Annotation {
  std::string evidence;
  VoteSet votes;

  bool operator==(const T1Annotation&) const = default;
};

struct T2Annotation {
  std::vector<std::string> evidence;
  VoteSet votes;

  bool operator==(const T2Annotation&) const = default;
};

struct WtrRecord {
  std::string reference_id;
  std::string reference_property_id;
  std::string reference_datatype;
  std::string url;
  std::string netloc;
  std::string netloc_group;
  std::optional<std::string> final_url;
  std::optional<std::string> html;

  std::string claim_id;
  std::string rank;
  std::string datatype;
  TripleComponent subject;
  TripleComponent property;
  TripleComponent object;
  std::optional<std::string> verbalisation;

  std::vector<T1Annotation> t1;  // at most 5
  std::optional<T2Annotation> t2;
  AuthorLabel author_label = AuthorLabel::k2B;

  bool operator==(const WtrRecord&) const = default;

  Triple triple() const;
  Reference reference() const;  // carries the stored html
};

struct WtrDataset {
  std::vector<WtrRecord> records;
  std::size_t duplicates_dropped = 0;
};

// Errors: kIo, kSchemaError (message starts with "line N: <field path>").
WtrDataset parse_wtr(std::istream& in);
WtrDataset load_wtr(const std::filesystem::path& path);

Json record_to_json(const WtrRecord& r);
WtrRecord record_from_json(const Json& j);  // kSchemaError with field path
void write_wtr(std::ostream& out, const std::vector<WtrRecord>& records);
void save_wtr(const std::filesystem::path& path, const std::vector<WtrRecord>& records);

struct VoteResult {
  int label = kVoteNotSure;  // lowest tied code when tie is set
  bool tie = false;
};

// Mode of the vote codes. NotSure only wins when every vote is NotSure.
// Errors: kInvalidArgument for an empty list or a code outside 0..3.
VoteResult majority_vote(std::span<const int> votes);

// Label of a vote set after tie-breaking: the stored tie-break decides ties;
// without one, tied or all-NotSure sets yield nothing.
std::optional<Stance> resolve_votes(const VoteSet& v);

enum class Task { kTernary, kBinary };

std::string_view task_name(Task t);

// Ternary labels are stances; binary labels use index 0 = supporting and
// 1 = not-supporting.
int map_author_label(AuthorLabel l, Task task);
int binary_of(Stance s);

struct EvaluationConfig {
  PipelineConfig pipeline;  // aggregator list is ignored: all three are run
  std::vector<Task> tasks = {Task::kTernary, Task::kBinary};
  // When set, the classifier uses this model; otherwise its predictions are
  // out-of-fold cross-validated on each label set.
  const AggregationModel* model = nullptr;
  int folds = 5;
  std::uint64_t seed = 0;
  ForestParams forest;
  int jobs = 1;
};

struct Prediction {
  Stance final_class = Stance::kNei;
  double support_probability = 0.0;
};

struct RecordOutcome {
  std::size_t index = 0;
  std::string claim_id;
  std::string reference_id;
  AuthorLabel author_label = AuthorLabel::k2B;
  std::optional<std::string> error;
  std::optional<Stance> t2_label;
  std::string t2_status;  // ok, tie, not_sure, missing
  std::size_t passages = 0;
  bool all_irrelevant = false;
  FeatureVector features;
  std::optional<Prediction> weighted_sum;
  std::optional<Prediction> malon;
  // Classifier predictions per label set; they differ only when the model is
  // cross-validated.
  std::optional<Prediction> classifier_t2;
  std::optional<Prediction> classifier_t2_binary;
  std::optional<Prediction> classifier_author;
  std::optional<Prediction> classifier_author_binary;
  // (relevance score, share of SUPP/REF votes) per T1 evidence.
  std::vector<std::pair<double, double>> relevance_votes;
};

struct MetricsEntry {
  std::string labels;  // "t2" or "author"
  std::string subset;  // "ALL", "1A", ...
  Aggregator aggregator = Aggregator::kWeightedSum;
  Task task = Task::kTernary;
  MetricsReport metrics;
};

struct EvaluationBundle {
  std::size_t records = 0;
  std::size_t failed = 0;
  std::size_t t2_ties_excluded = 0;
  std::size_t t2_not_sure_excluded = 0;
  std::size_t t2_missing = 0;
  std::optional<double> all_irrelevant_fraction;
  std::optional<double> relevance_pearson_r;
  std::optional<double> t1_fleiss_kappa;
  std::optional<double> t2_fleiss_kappa;
  std::optional<double> t1_tie_fraction;
  std::optional<double> t2_tie_fraction;
  std::vector<MetricsEntry> metrics;
  std::vector<std::string> notes;
  std::vector<RecordOutcome> outcomes;  // input order
};

// Runs the pipeline on every record using stored html only. Per-record
// failures are recorded in the outcome and never stop the run.
EvaluationBundle evaluate_pipeline(const std::vector<WtrRecord>& records, ScorerBackend& backend,
                                   const EvaluationConfig& config);

Json evaluation_json(const EvaluationBundle& b);
// Plain-text tables: collective stance by aggregator, then binary results per
// author label subset.
std::string evaluation_tables(const EvaluationBundle& b);
std::string evaluation_csv(const EvaluationBundle& b);

enum class LabelSource { kT2, kAuthor };

struct TrainingSet {
  std::vector<LabeledFeatures> samples;
  std::vector<std::size_t> record_index;
  std::size_t skipped = 0;  // failed or unlabeled records
};

// Features for each record, paired with its T2 majority label or its author
// label mapped to a stance.
TrainingSet collect_training_set(const std::vector<WtrRecord>& records, ScorerBackend& backend,
                                 const PipelineConfig& pipeline, LabelSource source, int jobs);

}  // namespace prove

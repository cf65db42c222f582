#include "prove/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace prove {

namespace {

constexpr std::array<std::string_view, 6> kAuthorNames = {"1A", "1B", "1C", "1D", "2A", "2B"};

}  // namespace

std::string_view author_label_name(AuthorLabel l) { return kAuthorNames[static_cast<int>(l)]; }

AuthorLabel parse_author_label(std::string_view name) {
  std::string compact;
  for (char c : name) {
    if (c != '.' && c != ' ') compact += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  for (std::size_t i = 0; i < kAuthorNames.size(); ++i) {
    if (compact == kAuthorNames[i]) return static_cast<AuthorLabel>(i);
  }
  fail(ErrorCode::kInvalidArgument, "unknown author label '" + std::string(name) + "'");
}

std::string_view task_name(Task t) { return t == Task::kTernary ? "ternary" : "binary"; }

int binary_of(Stance s) { return s == Stance::kSupp ? 0 : 1; }

int map_author_label(AuthorLabel l, Task task) {
  Stance s = Stance::kSupp;
  if (l == AuthorLabel::k2A) s = Stance::kRef;
  if (l == AuthorLabel::k2B) s = Stance::kNei;
  return task == Task::kTernary ? static_cast<int>(s) : binary_of(s);
}

Triple WtrRecord::triple() const {
  Triple t;
  t.id = claim_id;
  t.subject = subject;
  t.predicate = property;
  t.object = object;
  t.object_datatype = datatype.empty() ? ObjectDatatype::kEntity : parse_datatype(datatype);
  return t;
}

Reference WtrRecord::reference() const {
  Reference r;
  r.id = reference_id;
  r.source = UrlSource{url};
  r.final_url = final_url;
  r.html = html;
  if (!netloc.empty()) r.netloc = netloc;
  return r;
}

// ---------------------------------------------------------------------------
// Record serialization

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::kSchemaError, path + ": " + what);
}

const Json& need(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema_fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join_path(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

std::string str(const Json& j, const char* key, const std::string& path) {
  const Json& v = need(j, key, path);
  if (!v.is_string()) schema_fail(join_path(path, key), "expected a string");
  return v.get<std::string>();
}

std::string str_or_empty(const Json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) schema_fail(join_path(path, key), "expected a string");
  return it->get<std::string>();
}

std::optional<std::string> opt_str(const Json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema_fail(join_path(path, key), "expected a string");
  return it->get<std::string>();
}

int vote_code(const Json& v, const std::string& path, bool allow_not_sure) {
  if (!v.is_number_integer()) schema_fail(path, "expected an integer vote code");
  const auto code = v.get<long long>();
  const long long top = allow_not_sure ? kVoteNotSure : kVoteNei;
  if (code < 0 || code > top) schema_fail(path, "unknown vote code " + std::to_string(code));
  return static_cast<int>(code);
}

std::optional<int> opt_code(const Json& j, const char* key, const std::string& path,
                            bool allow_not_sure) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return vote_code(*it, join_path(path, key), allow_not_sure);
}

TripleComponent component(const Json& j, const std::string& path) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  TripleComponent c;
  c.id = str_or_empty(j, "id", path);
  c.main_label = str(j, "label", path);
  if (auto it = j.find("aliases"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) schema_fail(path + ".aliases", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_string()) {
        schema_fail(path + ".aliases[" + std::to_string(i) + "]", "expected a string");
      }
      c.aliases.push_back((*it)[i].get<std::string>());
    }
  }
  c.description = opt_str(j, "description", path);
  return c;
}

Json component_json(const TripleComponent& c) {
  Json j;
  j["id"] = c.id;
  j["label"] = c.main_label;
  j["aliases"] = c.aliases;
  j["description"] = c.description ? Json(*c.description) : Json(nullptr);
  return j;
}

VoteSet vote_set(const Json& j, const std::string& path) {
  VoteSet v;
  const Json& votes = need(j, "votes", path);
  if (!votes.is_array()) schema_fail(path + ".votes", "expected an array");
  for (std::size_t i = 0; i < votes.size(); ++i) {
    const std::string vp = path + ".votes[" + std::to_string(i) + "]";
    const Json& item = votes[i];
    if (!item.is_object()) schema_fail(vp, "expected an object");
    Vote vote;
    vote.worker_id = str_or_empty(item, "worker_id", vp);
    vote.assignment_id = str_or_empty(item, "assignment_id", vp);
    vote.code = vote_code(need(item, "code", vp), vp + ".code", true);
    if (auto it = item.find("seconds"); it != item.end() && !it->is_null()) {
      if (!it->is_number()) schema_fail(vp + ".seconds", "expected a number");
      vote.seconds = it->get<double>();
    }
    vote.not_sure_reason = opt_str(item, "not_sure_reason", vp);
    v.votes.push_back(std::move(vote));
  }
  v.aggregated = opt_code(j, "aggregated", path, true);
  v.tie_break = opt_code(j, "tie_break", path, false);
  return v;
}

void put_vote_set(Json& j, const VoteSet& v) {
  Json votes = Json::array();
  for (const auto& vote : v.votes) {
    votes.push_back({{"worker_id", vote.worker_id},
                     {"assignment_id", vote.assignment_id},
                     {"code", vote.code},
                     {"seconds", vote.seconds},
                     {"not_sure_reason",
                      vote.not_sure_reason ? Json(*vote.not_sure_reason) : Json(nullptr)}});
  }
  j["votes"] = std::move(votes);
  j["aggregated"] = v.aggregated ? Json(*v.aggregated) : Json(nullptr);
  j["tie_break"] = v.tie_break ? Json(*v.tie_break) : Json(nullptr);
}

}  // namespace

WtrRecord record_from_json(const Json& j) {
  if (!j.is_object()) schema_fail("record", "expected an object");
  WtrRecord r;
  const Json& ref = need(j, "reference", "");
  r.reference_id = str(ref, "id", "reference");
  r.reference_property_id = str_or_empty(ref, "property_id", "reference");
  r.reference_datatype = str_or_empty(ref, "datatype", "reference");
  r.url = str(ref, "url", "reference");
  r.netloc = str_or_empty(ref, "netloc", "reference");
  r.netloc_group = str_or_empty(ref, "netloc_group", "reference");
  r.final_url = opt_str(ref, "final_url", "reference");
  r.html = opt_str(ref, "html", "reference");

  const Json& claim = need(j, "claim", "");
  r.claim_id = str(claim, "id", "claim");
  r.rank = str_or_empty(claim, "rank", "claim");
  r.datatype = str_or_empty(claim, "datatype", "claim");
  if (!r.datatype.empty()) {
    try {
      parse_datatype(r.datatype);
    } catch (const Error&) {
      schema_fail("claim.datatype", "unknown datatype '" + r.datatype + "'");
    }
  }
  r.subject = component(need(claim, "subject", "claim"), "claim.subject");
  r.property = component(need(claim, "property", "claim"), "claim.property");
  r.object = component(need(claim, "object", "claim"), "claim.object");
  r.verbalisation = opt_str(claim, "verbalisation", "claim");

  if (auto it = j.find("t1"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) schema_fail("t1", "expected an array");
    if (it->size() > kDefaultEvidenceSize) schema_fail("t1", "more than 5 evidence entries");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "t1[" + std::to_string(i) + "]";
      T1Annotation a;
      a.evidence = str((*it)[i], "evidence", path);
      a.votes = vote_set((*it)[i], path);
      r.t1.push_back(std::move(a));
    }
  }
  if (auto it = j.find("t2"); it != j.end() && !it->is_null()) {
    T2Annotation a;
    const Json& ev = need(*it, "evidence", "t2");
    if (!ev.is_array()) schema_fail("t2.evidence", "expected an array");
    if (ev.size() > kDefaultEvidenceSize) schema_fail("t2.evidence", "more than 5 evidence entries");
    for (std::size_t i = 0; i < ev.size(); ++i) {
      if (!ev[i].is_string()) schema_fail("t2.evidence[" + std::to_string(i) + "]", "expected a string");
      a.evidence.push_back(ev[i].get<std::string>());
    }
    a.votes = vote_set(*it, "t2");
    r.t2 = std::move(a);
  }
  const std::string label = str(j, "author_label", "");
  try {
    r.author_label = parse_author_label(label);
  } catch (const Error&) {
    schema_fail("author_label", "unknown author label '" + label + "'");
  }
  return r;
}

Json record_to_json(const WtrRecord& r) {
  auto opt = [](const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); };
  Json j;
  j["reference"] = {{"id", r.reference_id},
                    {"property_id", r.reference_property_id},
                    {"datatype", r.reference_datatype},
                    {"url", r.url},
                    {"netloc", r.netloc},
                    {"netloc_group", r.netloc_group},
                    {"final_url", opt(r.final_url)},
                    {"html", opt(r.html)}};
  j["claim"] = {{"id", r.claim_id},
                {"rank", r.rank},
                {"datatype", r.datatype},
                {"subject", component_json(r.subject)},
                {"property", component_json(r.property)},
                {"object", component_json(r.object)},
                {"verbalisation", opt(r.verbalisation)}};
  Json t1 = Json::array();
  for (const auto& a : r.t1) {
    Json item;
    item["evidence"] = a.evidence;
    put_vote_set(item, a.votes);
    t1.push_back(std::move(item));
  }
  j["t1"] = std::move(t1);
  if (r.t2) {
    Json t2;
    t2["evidence"] = r.t2->evidence;
    put_vote_set(t2, r.t2->votes);
    j["t2"] = std::move(t2);
  } else {
    j["t2"] = nullptr;
  }
  j["author_label"] = std::string(author_label_name(r.author_label));
  return j;
}

WtrDataset parse_wtr(std::istream& in) {
  WtrDataset out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::kSchemaError, where + "invalid JSON (" + e.what() + ")");
    }
    if (!header_seen) {
      if (!j.is_object() || j.value("format", "") != kWtrFormat) {
        fail(ErrorCode::kSchemaError, where + "format: expected a '" + kWtrFormat + "' header");
      }
      if (j.value("version", 0) != kWtrVersion) {
        fail(ErrorCode::kSchemaError, where + "version: unsupported dataset version");
      }
      header_seen = true;
      continue;
    }
    WtrRecord r;
    try {
      r = record_from_json(j);
    } catch (const Error& e) {
      fail(ErrorCode::kSchemaError, where + e.what());
    }
    const std::string claim_key =
        r.verbalisation.value_or(r.subject.main_label + '\x1f' + r.property.main_label + '\x1f' +
                                 r.object.main_label);
    if (!seen.emplace(claim_key, r.final_url.value_or(r.url)).second) {
      ++out.duplicates_dropped;
      continue;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

WtrDataset load_wtr(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open dataset " + path.string());
  return parse_wtr(in);
}

void write_wtr(std::ostream& out, const std::vector<WtrRecord>& records) {
  out << Json{{"format", kWtrFormat}, {"version", kWtrVersion}}.dump() << '\n';
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

void save_wtr(const std::filesystem::path& path, const std::vector<WtrRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write dataset " + path.string());
  write_wtr(out, records);
}

// ---------------------------------------------------------------------------
// Annotation aggregation

VoteResult majority_vote(std::span<const int> votes) {
  require(!votes.empty(), "majority_vote needs at least one vote");
  std::array<std::size_t, 4> counts{};
  for (int v : votes) {
    require(v >= 0 && v <= kVoteNotSure, "vote code out of range");
    ++counts[static_cast<std::size_t>(v)];
  }
  const bool substantive = counts[0] + counts[1] + counts[2] > 0;
  const std::size_t candidates = substantive ? 3 : 4;
  VoteResult r;
  std::size_t best = 0;
  for (std::size_t c = 0; c < candidates; ++c) {
    if (counts[c] > best) {
      best = counts[c];
      r.label = static_cast<int>(c);
      r.tie = false;
    } else if (counts[c] == best && best > 0) {
      r.tie = true;
    }
  }
  return r;
}

namespace {

enum class VoteStatus { kOk, kTie, kNotSure, kMissing };

std::pair<std::optional<Stance>, VoteStatus> resolve_with_status(const VoteSet& v) {
  if (v.votes.empty()) {
    if (v.aggregated && *v.aggregated != kVoteNotSure) {
      return {static_cast<Stance>(*v.aggregated), VoteStatus::kOk};
    }
    return {std::nullopt, v.aggregated ? VoteStatus::kNotSure : VoteStatus::kMissing};
  }
  std::vector<int> codes;
  for (const auto& vote : v.votes) codes.push_back(vote.code);
  const VoteResult r = majority_vote(codes);
  if (r.tie) {
    if (v.tie_break) return {static_cast<Stance>(*v.tie_break), VoteStatus::kOk};
    return {std::nullopt, VoteStatus::kTie};
  }
  if (r.label == kVoteNotSure) return {std::nullopt, VoteStatus::kNotSure};
  return {static_cast<Stance>(r.label), VoteStatus::kOk};
}

std::string_view status_name(VoteStatus s) {
  switch (s) {
    case VoteStatus::kOk: return "ok";
    case VoteStatus::kTie: return "tie";
    case VoteStatus::kNotSure: return "not_sure";
    case VoteStatus::kMissing: return "missing";
  }
  return "missing";
}

}  // namespace

std::optional<Stance> resolve_votes(const VoteSet& v) { return resolve_with_status(v).first; }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

Prediction prediction_of(const AggregateResult& r) { return {r.final_class, r.support_probability}; }

Prediction prediction_of(const std::array<double, 3>& theta) {
  return {argmax_stance(theta), theta[0]};
}

RecordOutcome run_record(const WtrRecord& rec, std::size_t index, ScorerBackend& backend,
                         const PipelineConfig& base, const AggregationModel* model) {
  RecordOutcome o;
  o.index = index;
  o.claim_id = rec.claim_id;
  o.reference_id = rec.reference_id;
  o.author_label = rec.author_label;
  if (rec.t2) {
    auto [label, status] = resolve_with_status(rec.t2->votes);
    o.t2_label = label;
    o.t2_status = status_name(status);
  } else {
    o.t2_status = "missing";
  }
  try {
    PipelineConfig config = base;
    config.aggregators = {Aggregator::kWeightedSum, Aggregator::kMalon};
    if (model != nullptr) config.aggregators.push_back(Aggregator::kClassifier);
    config.model = model;
    const Triple triple = rec.triple();
    const Reference reference = rec.reference();
    PipelineOutput out = verify_extracted(triple, extract_stored(reference, config), backend,
                                          config, rec.verbalisation);
    o.passages = out.extraction.passages.size();
    o.all_irrelevant = out.all_irrelevant();
    o.features = out.features;
    for (const auto& v : out.verdicts) {
      const Prediction p = prediction_of(v.result);
      switch (v.aggregator) {
        case Aggregator::kWeightedSum: o.weighted_sum = p; break;
        case Aggregator::kMalon: o.malon = p; break;
        case Aggregator::kClassifier:
          o.classifier_t2 = o.classifier_t2_binary = o.classifier_author =
              o.classifier_author_binary = p;
          break;
      }
    }
    std::vector<std::string> texts;
    std::vector<double> shares;
    for (const auto& a : rec.t1) {
      if (a.votes.votes.empty()) continue;
      std::size_t relevant = 0;
      for (const auto& vote : a.votes.votes) {
        relevant += vote.code == kVoteSupp || vote.code == kVoteRef ? 1 : 0;
      }
      texts.push_back(a.evidence);
      shares.push_back(static_cast<double>(relevant) / static_cast<double>(a.votes.votes.size()));
    }
    if (!texts.empty()) {
      const auto scores = call_relevance(backend, out.verbalisation.text, texts);
      for (std::size_t i = 0; i < scores.size(); ++i) o.relevance_votes.emplace_back(scores[i], shares[i]);
    }
  } catch (const Error& e) {
    o.error = std::string(error_code_name(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    o.error = std::string("error: ") + e.what();
  }
  return o;
}

std::vector<RecordOutcome> run_all(const std::vector<WtrRecord>& records, ScorerBackend& backend,
                                   const PipelineConfig& config, const AggregationModel* model,
                                   int jobs) {
  std::vector<RecordOutcome> outcomes(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    outcomes[i] = run_record(records[i], i, backend, config, model);
  });
  return outcomes;
}

std::optional<Stance> author_stance(const RecordOutcome& o) {
  return static_cast<Stance>(map_author_label(o.author_label, Task::kTernary));
}

Stance fold_binary(Stance s) { return s == Stance::kSupp ? Stance::kSupp : Stance::kNei; }

// Fills one classifier prediction slot with out-of-fold predictions.
void cross_validate(std::vector<RecordOutcome>& outcomes,
                    const std::function<std::optional<Stance>(const RecordOutcome&)>& label_of,
                    std::optional<Prediction> RecordOutcome::*slot, const EvaluationConfig& config,
                    const std::string& what, std::vector<std::string>& notes) {
  std::vector<LabeledFeatures> data;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].error) continue;
    auto label = label_of(outcomes[i]);
    if (!label) continue;
    data.push_back({outcomes[i].features, *label});
    index.push_back(i);
  }
  TrainOptions options;
  options.folds = config.folds;
  options.seed = config.seed;
  options.params = config.forest;
  options.jobs = config.jobs;
  try {
    const auto oof = cross_val_predict(data, options);
    for (std::size_t k = 0; k < index.size(); ++k) outcomes[index[k]].*slot = prediction_of(oof[k]);
  } catch (const Error& e) {
    notes.push_back("classifier not cross-validated on " + what + ": " + e.what());
  }
}

struct Sample {
  int prediction;
  int label;
  double score;
};

void add_metrics(EvaluationBundle& b, const std::string& labels, const std::string& subset,
                 Aggregator aggregator, Task task, const std::vector<Sample>& samples) {
  if (samples.empty()) {
    b.notes.push_back("no samples for " + labels + "/" + subset + "/" +
                      std::string(aggregator_name(aggregator)) + "/" + std::string(task_name(task)));
    return;
  }
  std::vector<int> pred, truth, positive;
  std::vector<double> scores;
  for (const auto& s : samples) {
    pred.push_back(s.prediction);
    truth.push_back(s.label);
    positive.push_back(s.label == 0 ? 1 : 0);
    scores.push_back(s.score);
  }
  MetricsEntry entry;
  entry.labels = labels;
  entry.subset = subset;
  entry.aggregator = aggregator;
  entry.task = task;
  entry.metrics = classification_metrics(
      pred, truth, task == Task::kTernary ? stance_class_names() : binary_class_names());
  const auto pos = std::count(positive.begin(), positive.end(), 1);
  if (task == Task::kBinary && pos > 0 && pos < static_cast<long>(positive.size())) {
    entry.metrics.auc = roc_auc(scores, positive);
  }
  b.metrics.push_back(std::move(entry));
}

std::optional<double> kappa_of(const std::vector<std::vector<std::size_t>>& counts) {
  std::size_t rated = 0;
  for (const auto& row : counts) {
    std::size_t n = 0;
    for (auto c : row) n += c;
    rated += n >= 2 ? 1 : 0;
  }
  if (rated == 0) return std::nullopt;
  return fleiss_kappa(counts);
}

std::vector<std::size_t> vote_counts(const VoteSet& v) {
  std::vector<std::size_t> row(4, 0);
  for (const auto& vote : v.votes) ++row[static_cast<std::size_t>(vote.code)];
  return row;
}

}  // namespace

EvaluationBundle evaluate_pipeline(const std::vector<WtrRecord>& records, ScorerBackend& backend,
                                   const EvaluationConfig& config) {
  EvaluationBundle b;
  b.records = records.size();
  b.outcomes = run_all(records, backend, config.pipeline, config.model, config.jobs);

  const bool ternary =
      std::find(config.tasks.begin(), config.tasks.end(), Task::kTernary) != config.tasks.end();
  const bool binary =
      std::find(config.tasks.begin(), config.tasks.end(), Task::kBinary) != config.tasks.end();

  if (config.model == nullptr) {
    auto t2 = [](const RecordOutcome& o) { return o.t2_label; };
    auto t2_bin = [](const RecordOutcome& o) -> std::optional<Stance> {
      if (!o.t2_label) return std::nullopt;
      return fold_binary(*o.t2_label);
    };
    auto author_bin = [](const RecordOutcome& o) -> std::optional<Stance> {
      return fold_binary(*author_stance(o));
    };
    if (ternary) {
      cross_validate(b.outcomes, t2, &RecordOutcome::classifier_t2, config, "t2/ternary", b.notes);
      cross_validate(b.outcomes, author_stance, &RecordOutcome::classifier_author, config,
                     "author/ternary", b.notes);
    }
    if (binary) {
      cross_validate(b.outcomes, t2_bin, &RecordOutcome::classifier_t2_binary, config,
                     "t2/binary", b.notes);
      cross_validate(b.outcomes, author_bin, &RecordOutcome::classifier_author_binary, config,
                     "author/binary", b.notes);
    }
  }

  std::size_t ok = 0, irrelevant = 0;
  std::vector<double> rho, share;
  std::vector<std::vector<std::size_t>> t1_counts, t2_counts;
  std::size_t t1_sets = 0, t1_ties = 0, t2_sets = 0, t2_ties = 0;
  for (std::size_t i = 0; i < b.outcomes.size(); ++i) {
    const auto& o = b.outcomes[i];
    const auto& rec = records[i];
    for (const auto& a : rec.t1) {
      if (a.votes.votes.empty()) continue;
      t1_counts.push_back(vote_counts(a.votes));
      std::vector<int> codes;
      for (const auto& v : a.votes.votes) codes.push_back(v.code);
      ++t1_sets;
      t1_ties += majority_vote(codes).tie ? 1 : 0;
    }
    if (rec.t2 && !rec.t2->votes.votes.empty()) {
      t2_counts.push_back(vote_counts(rec.t2->votes));
      std::vector<int> codes;
      for (const auto& v : rec.t2->votes.votes) codes.push_back(v.code);
      ++t2_sets;
      t2_ties += majority_vote(codes).tie ? 1 : 0;
    }
    if (o.error) {
      ++b.failed;
      continue;
    }
    ++ok;
    irrelevant += o.all_irrelevant ? 1 : 0;
    for (const auto& [r, s] : o.relevance_votes) {
      rho.push_back(r);
      share.push_back(s);
    }
    if (o.t2_status == "tie") ++b.t2_ties_excluded;
    if (o.t2_status == "not_sure") ++b.t2_not_sure_excluded;
    if (o.t2_status == "missing") ++b.t2_missing;
  }
  if (ok > 0) b.all_irrelevant_fraction = static_cast<double>(irrelevant) / static_cast<double>(ok);
  if (rho.size() >= 2) {
    try {
      b.relevance_pearson_r = pearson_r(rho, share);
    } catch (const Error& e) {
      b.notes.push_back(std::string("relevance correlation undefined: ") + e.what());
    }
  }
  b.t1_fleiss_kappa = kappa_of(t1_counts);
  b.t2_fleiss_kappa = kappa_of(t2_counts);
  if (t1_sets > 0) b.t1_tie_fraction = static_cast<double>(t1_ties) / static_cast<double>(t1_sets);
  if (t2_sets > 0) b.t2_tie_fraction = static_cast<double>(t2_ties) / static_cast<double>(t2_sets);
  if (b.t2_ties_excluded > 0) {
    b.notes.push_back(std::to_string(b.t2_ties_excluded) +
                      " record(s) with tied T2 votes and no tie-break excluded");
  }
  if (b.t2_not_sure_excluded > 0) {
    b.notes.push_back(std::to_string(b.t2_not_sure_excluded) +
                      " record(s) with NotSure T2 majority excluded");
  }

  constexpr std::array<Aggregator, 3> kAggregators = {Aggregator::kWeightedSum, Aggregator::kMalon,
                                                      Aggregator::kClassifier};
  auto prediction = [](const RecordOutcome& o, Aggregator a, bool author,
                       Task task) -> const std::optional<Prediction>& {
    if (a == Aggregator::kWeightedSum) return o.weighted_sum;
    if (a == Aggregator::kMalon) return o.malon;
    if (author) return task == Task::kTernary ? o.classifier_author : o.classifier_author_binary;
    return task == Task::kTernary ? o.classifier_t2 : o.classifier_t2_binary;
  };
  auto encode = [](Stance s, Task task) {
    return task == Task::kTernary ? static_cast<int>(s) : binary_of(s);
  };

  for (Task task : config.tasks) {
    for (Aggregator a : kAggregators) {
      std::vector<Sample> samples;
      for (const auto& o : b.outcomes) {
        const auto& p = prediction(o, a, false, task);
        if (o.error || !o.t2_label || !p) continue;
        samples.push_back({encode(p->final_class, task), encode(*o.t2_label, task),
                           p->support_probability});
      }
      add_metrics(b, "t2", "ALL", a, task, samples);
    }
  }
  for (Task task : config.tasks) {
    for (Aggregator a : kAggregators) {
      const std::vector<std::pair<std::string, std::optional<AuthorLabel>>> subsets =
          task == Task::kBinary
              ? std::vector<std::pair<std::string, std::optional<AuthorLabel>>>{
                    {"1A", AuthorLabel::k1A}, {"1B", AuthorLabel::k1B},
                    {"1D", AuthorLabel::k1D}, {"ALL", std::nullopt}}
              : std::vector<std::pair<std::string, std::optional<AuthorLabel>>>{
                    {"ALL", std::nullopt}};
      for (const auto& [name, keep] : subsets) {
        std::vector<Sample> samples;
        for (const auto& o : b.outcomes) {
          const auto& p = prediction(o, a, true, task);
          if (o.error || !p) continue;
          const bool supporting = map_author_label(o.author_label, Task::kBinary) == 0;
          if (keep && supporting && o.author_label != *keep) continue;
          samples.push_back({encode(p->final_class, task), map_author_label(o.author_label, task),
                             p->support_probability});
        }
        add_metrics(b, "author", name, a, task, samples);
      }
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

Json opt_num(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json prediction_json(const std::optional<Prediction>& p) {
  if (!p) return nullptr;
  return {{"final_class", std::string(stance_name(p->final_class))},
          {"support_probability", p->support_probability}};
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Json evaluation_json(const EvaluationBundle& b) {
  Json j;
  j["schema"] = kEvaluationSchema;
  j["records"] = b.records;
  j["failed"] = b.failed;
  j["t2_excluded"] = {{"tie", b.t2_ties_excluded},
                      {"not_sure", b.t2_not_sure_excluded},
                      {"missing", b.t2_missing}};
  j["all_irrelevant_fraction"] = opt_num(b.all_irrelevant_fraction);
  j["relevance_pearson_r"] = opt_num(b.relevance_pearson_r);
  j["fleiss_kappa"] = {{"t1", opt_num(b.t1_fleiss_kappa)}, {"t2", opt_num(b.t2_fleiss_kappa)}};
  j["tie_fraction"] = {{"t1", opt_num(b.t1_tie_fraction)}, {"t2", opt_num(b.t2_tie_fraction)}};
  Json metrics = Json::array();
  for (const auto& m : b.metrics) {
    Json entry = {{"labels", m.labels},
                  {"subset", m.subset},
                  {"aggregator", std::string(aggregator_name(m.aggregator))},
                  {"task", std::string(task_name(m.task))}};
    entry["metrics"] = metrics_json(m.metrics);
    metrics.push_back(std::move(entry));
  }
  j["metrics"] = std::move(metrics);
  j["notes"] = b.notes;
  Json outcomes = Json::array();
  for (const auto& o : b.outcomes) {
    Json r;
    r["index"] = o.index;
    r["claim_id"] = o.claim_id;
    r["reference_id"] = o.reference_id;
    r["author_label"] = std::string(author_label_name(o.author_label));
    r["t2_label"] = o.t2_label ? Json(std::string(stance_name(*o.t2_label))) : Json(nullptr);
    r["t2_status"] = o.t2_status;
    r["error"] = o.error ? Json(*o.error) : Json(nullptr);
    r["passages"] = o.passages;
    r["all_irrelevant"] = o.all_irrelevant;
    r["weighted_sum"] = prediction_json(o.weighted_sum);
    r["malon"] = prediction_json(o.malon);
    r["classifier"] = {{"t2_ternary", prediction_json(o.classifier_t2)},
                       {"t2_binary", prediction_json(o.classifier_t2_binary)},
                       {"author_ternary", prediction_json(o.classifier_author)},
                       {"author_binary", prediction_json(o.classifier_author_binary)}};
    outcomes.push_back(std::move(r));
  }
  j["outcomes"] = std::move(outcomes);
  return j;
}

std::string evaluation_tables(const EvaluationBundle& b) {
  std::ostringstream s;
  const std::string header = "Acc    | macro P  R      F1     | weighted P  R      F1     | AUC";
  auto row = [&](const MetricsReport& m) {
    s << fmt3(m.accuracy) << "  | " << fmt3(m.macro_precision) << "  " << fmt3(m.macro_recall)
      << "  " << fmt3(m.macro_f1) << "  | " << fmt3(m.weighted_precision) << "       "
      << fmt3(m.weighted_recall) << "  " << fmt3(m.weighted_f1) << "  | "
      << (m.auc ? fmt3(*m.auc) : std::string("-")) << "  (n=" << m.count << ")\n";
  };
  s << "Collective stance (T2 majority labels)\n";
  s << pad("Method", 14) << pad("Classes", 9) << header << "\n";
  for (const auto& m : b.metrics) {
    if (m.labels != "t2") continue;
    s << pad(std::string(aggregator_name(m.aggregator)), 14)
      << pad(m.task == Task::kTernary ? "3" : "2", 9);
    row(m.metrics);
  }
  s << "\nReference-level author labels\n";
  s << pad("Method", 14) << pad("Classes", 9) << pad("Subset", 8) << header << "\n";
  for (const auto& m : b.metrics) {
    if (m.labels != "author") continue;
    s << pad(std::string(aggregator_name(m.aggregator)), 14)
      << pad(m.task == Task::kTernary ? "3" : "2", 9) << pad(m.subset, 8);
    row(m.metrics);
  }
  s << "\nrecords: " << b.records << ", failed: " << b.failed << "\n";
  if (b.all_irrelevant_fraction) {
    s << "all passages irrelevant: " << fmt3(*b.all_irrelevant_fraction) << "\n";
  }
  if (b.relevance_pearson_r) {
    s << "relevance vs. T1 votes (Pearson r): " << fmt3(*b.relevance_pearson_r) << "\n";
  }
  if (b.t1_fleiss_kappa) s << "T1 Fleiss' kappa: " << fmt3(*b.t1_fleiss_kappa) << "\n";
  if (b.t2_fleiss_kappa) s << "T2 Fleiss' kappa: " << fmt3(*b.t2_fleiss_kappa) << "\n";
  for (const auto& n : b.notes) s << "note: " << n << "\n";
  return s.str();
}

std::string evaluation_csv(const EvaluationBundle& b) {
  std::ostringstream s;
  s << "index,claim_id,reference_id,author_label,t2_label,error,"
       "weighted_sum_class,weighted_sum_y,malon_class,malon_y,classifier_class,classifier_y\n";
  auto cells = [&](const std::optional<Prediction>& p) {
    if (!p) {
      s << ",,";
      return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", p->support_probability);
    s << ',' << stance_name(p->final_class) << ',' << buf;
  };
  for (const auto& o : b.outcomes) {
    s << o.index << ',' << csv_field(o.claim_id) << ',' << csv_field(o.reference_id) << ','
      << author_label_name(o.author_label) << ','
      << (o.t2_label ? std::string(stance_name(*o.t2_label)) : std::string()) << ','
      << csv_field(o.error.value_or(""));
    cells(o.weighted_sum);
    cells(o.malon);
    cells(o.classifier_t2 ? o.classifier_t2 : o.classifier_author);
    s << '\n';
  }
  return s.str();
}

TrainingSet collect_training_set(const std::vector<WtrRecord>& records, ScorerBackend& backend,
                                 const PipelineConfig& pipeline, LabelSource source, int jobs) {
  const auto outcomes = run_all(records, backend, pipeline, nullptr, jobs);
  TrainingSet set;
  for (const auto& o : outcomes) {
    std::optional<Stance> label = source == LabelSource::kT2 ? o.t2_label : author_stance(o);
    if (o.error || !label) {
      ++set.skipped;
      continue;
    }
    set.samples.push_back({o.features, *label});
    set.record_index.push_back(o.index);
  }
  return set;
}

}  // namespace prove

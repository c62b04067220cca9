#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vidprobe/embedding_store.hpp"
#include "vidprobe/error.hpp"
#include "vidprobe/ingestion.hpp"
#include "vidprobe/label.hpp"
#include "vidprobe/linear_probe.hpp"
#include "vidprobe/random.hpp"
#include "vidprobe/reference_classifier.hpp"
#include "vidprobe/sources.hpp"

namespace vidprobe {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Counts with `positive` as the positive class.
inline ConfusionCounts confusion(std::span<const ClassLabel> preds, std::span<const ClassLabel> labels,
                                 ClassLabel positive) {
  if (preds.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(preds.size()) + " predictions vs " +
                                                  std::to_string(labels.size()) + " labels");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == positive;
    const bool t = labels[i] == positive;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

/// Same confusion matrix seen from the other class.
inline ConfusionCounts swap_positive(const ConfusionCounts& c) { return {c.tn, c.fn, c.tp, c.fp}; }

/// F1 with every zero denominator (no predicted positives, no actual
/// positives, or precision + recall = 0) scoring 0.
inline double f1(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0 || c.tp + c.fn == 0) return 0.0;
  const double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

inline double accuracy(const ConfusionCounts& c) {
  const auto n = c.total();
  return n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
}

struct ClassScores {
  double f1_real = 0.0;
  double f1_fake = 0.0;
  double accuracy = 0.0;
  ConfusionCounts counts;  // Fake is the positive class

  static ClassScores from_counts(const ConfusionCounts& fake_positive) {
    return {f1(swap_positive(fake_positive)), f1(fake_positive), vidprobe::accuracy(fake_positive), fake_positive};
  }
};

inline ClassScores per_class_f1(std::span<const ClassLabel> preds, std::span<const ClassLabel> labels) {
  return ClassScores::from_counts(confusion(preds, labels, ClassLabel::Fake));
}

inline ClassScores per_class_f1(const std::vector<ClassLabel>& preds, const std::vector<ClassLabel>& labels) {
  return per_class_f1(std::span<const ClassLabel>(preds), std::span<const ClassLabel>(labels));
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

enum class Protocol { OneToMany, ManyToMany };
enum class Method { Distance, Probe };

inline std::string_view protocol_name(Protocol p) { return p == Protocol::OneToMany ? "one-to-many" : "many-to-many"; }
inline std::string_view method_name(Method m) { return m == Method::Distance ? "distance" : "probe"; }

inline Protocol parse_protocol(std::string_view s) {
  if (s == "one-to-many") return Protocol::OneToMany;
  if (s == "many-to-many") return Protocol::ManyToMany;
  throw Error(ErrorCode::InvalidArgument, "protocol must be one-to-many or many-to-many, got '" + std::string(s) + "'");
}

inline Method parse_method(std::string_view s) {
  if (s == "distance") return Method::Distance;
  if (s == "probe") return Method::Probe;
  throw Error(ErrorCode::InvalidArgument, "method must be distance or probe, got '" + std::string(s) + "'");
}

struct SplitSpec {
  Protocol protocol = Protocol::ManyToMany;
  std::vector<std::string> train_sources;  // generator sources; real sources are always split
  std::vector<std::string> test_sources;
  std::uint64_t seed = 0;
  double train_fraction = 0.5;
};

struct Split {
  std::vector<std::string> train;  // clip ids, manifest order
  std::vector<std::string> test;
};

namespace detail {

/// Origin groups of `clip_indices` are shuffled with (seed, source) and
/// assigned first-fit: a group joins train when it still fits under
/// round(fraction * clip count), otherwise it goes to test.
inline std::vector<bool> split_by_origin(const Manifest& m, const std::vector<std::size_t>& clip_indices,
                                         const std::string& source, std::uint64_t seed, double fraction) {
  std::vector<std::string> group_names;
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::size_t> group_size;
  std::vector<std::size_t> clip_group(clip_indices.size());
  for (std::size_t i = 0; i < clip_indices.size(); ++i) {
    const auto& origin = m.parent_of(m.clips()[clip_indices[i]]).origin_video_id;
    auto [it, inserted] = group_of.try_emplace(origin, group_names.size());
    if (inserted) {
      group_names.push_back(origin);
      group_size.push_back(0);
    }
    ++group_size[it->second];
    clip_group[i] = it->second;
  }
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(clip_indices.size())));
  const auto order = seeded_permutation(group_names.size(), seed, fnv1a64(source));
  std::vector<bool> group_train(group_names.size(), false);
  std::size_t taken = 0;
  for (std::size_t g : order) {
    if (taken + group_size[g] <= target) {
      group_train[g] = true;
      taken += group_size[g];
    }
  }
  std::vector<bool> out(clip_indices.size());
  for (std::size_t i = 0; i < clip_indices.size(); ++i) out[i] = group_train[clip_group[i]];
  return out;
}

inline std::vector<std::string> canonical_list(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& s : in) out.push_back(canonical_source(s));
  sort_sources(out);
  return out;
}

}  // namespace detail

/// Leakage-free train/test partition: no origin video has clips on both sides.
inline Split make_split(const Manifest& m, const SplitSpec& spec) {
  if (!(spec.train_fraction >= 0.0 && spec.train_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in [0, 1]");
  }
  const auto train_sources = detail::canonical_list(spec.train_sources);
  const auto test_sources = detail::canonical_list(spec.test_sources);

  std::map<std::string, std::vector<std::size_t>> by_source;
  std::set<std::string> real_sources;
  for (std::size_t i = 0; i < m.clips().size(); ++i) {
    const auto& v = m.parent_of(m.clips()[i]);
    by_source[v.source].push_back(i);
    if (v.class_label == ClassLabel::Real) real_sources.insert(v.source);
  }
  for (const auto* list : {&train_sources, &test_sources}) {
    for (const auto& s : *list) {
      if (!by_source.contains(s)) throw Error(ErrorCode::MissingSource, "source '" + s + "' has no clips in the manifest");
      if (real_sources.contains(s)) {
        throw Error(ErrorCode::InvalidArgument, "source '" + s + "' is a real corpus; real clips are split automatically");
      }
    }
  }
  if (spec.protocol == Protocol::OneToMany) {
    if (train_sources.size() != 1) {
      throw Error(ErrorCode::InvalidArgument, "one-to-many needs exactly one training source");
    }
    if (std::find(test_sources.begin(), test_sources.end(), train_sources[0]) != test_sources.end()) {
      throw Error(ErrorCode::InvalidArgument, "one-to-many training source '" + train_sources[0] + "' cannot be a test source");
    }
  }
  if (real_sources.empty()) throw Error(ErrorCode::MissingSource, "manifest has no real clips");

  std::vector<int> side(m.clips().size(), 0);  // 0 unused, 1 train, 2 test
  auto assign_split = [&](const std::string& source, bool test_gets_rest) {
    const auto& idx = by_source.at(source);
    const auto to_train = detail::split_by_origin(m, idx, source, spec.seed, spec.train_fraction);
    for (std::size_t i = 0; i < idx.size(); ++i) side[idx[i]] = to_train[i] ? 1 : (test_gets_rest ? 2 : 0);
  };
  auto assign_all = [&](const std::string& source, int s) {
    for (std::size_t i : by_source.at(source)) side[i] = s;
  };

  for (const auto& r : real_sources) assign_split(r, true);
  for (const auto& s : train_sources) {
    if (spec.protocol == Protocol::OneToMany) {
      assign_all(s, 1);
    } else {
      assign_split(s, std::find(test_sources.begin(), test_sources.end(), s) != test_sources.end());
    }
  }
  for (const auto& s : test_sources) {
    if (std::find(train_sources.begin(), train_sources.end(), s) == train_sources.end()) assign_all(s, 2);
  }

  // Origins shared across sources could still straddle the split; such test clips are dropped.
  std::unordered_set<std::string> train_origins;
  for (std::size_t i = 0; i < side.size(); ++i) {
    if (side[i] == 1) train_origins.insert(m.parent_of(m.clips()[i]).origin_video_id);
  }
  Split out;
  for (std::size_t i = 0; i < side.size(); ++i) {
    const auto& c = m.clips()[i];
    if (side[i] == 1) out.train.push_back(c.clip_id);
    else if (side[i] == 2 && !train_origins.contains(m.parent_of(c).origin_video_id)) out.test.push_back(c.clip_id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ReportCell {
  std::string train;  // training / reference source label
  std::string model;  // encoder id
  std::string test;   // test source
  ClassScores scores;
};

struct EvalReport {
  std::string protocol;
  std::string method;
  std::vector<ReportCell> cells;
  std::vector<std::string> warnings;
};

struct ProtocolConfig {
  Method method = Method::Distance;
  std::uint64_t seed = 0;
  double train_fraction = 0.5;
  TrainConfig train;
  bool l2_normalize = false;
  bool strict = false;
  // One-to-many: also evaluate the training source on a held-out half of its origin groups.
  bool fill_diagonal = false;
  // Many-to-many: evaluate on the training clips themselves (memorization check).
  bool diagnostic_leak = false;
  std::vector<std::string> test_only_sources = default_test_only_sources();
  std::string row_label;
  unsigned threads = 1;
};

/// Probe training on a record set; exposed so the CLI and protocols share it.
inline LinearProbe train_probe_records(const std::vector<EmbeddingRecord>& train, const ProtocolConfig& cfg,
                                       const std::string& model_id) {
  if (train.empty()) throw Error(ErrorCode::DegenerateLabels, "training set is empty");
  return vidprobe::train(make_dataset(train), cfg.train, model_id).probe;
}

namespace detail {

inline std::vector<EmbeddingRecord> gather(const EmbeddingStore& store, const Manifest& m,
                                           const std::vector<std::string>& ids, bool normalize) {
  std::vector<EmbeddingRecord> out;
  out.reserve(ids.size());
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    const auto* rec = store.find(id);
    if (!rec) {
      missing.push_back(id);
      continue;
    }
    const auto* clip = m.find_clip(id);
    if (clip && m.parent_of(*clip).class_label != rec->class_label) {
      throw Error(ErrorCode::InvariantViolation, "clip '" + id + "' is labelled differently in store and manifest");
    }
    out.push_back(*rec);
    if (normalize) l2_normalize(out.back().vector);
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " clip(s) absent from store '" + store.model_id() + "':";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw Error(ErrorCode::MissingEmbeddings, msg);
  }
  return out;
}

/// Fits the chosen classifier on `train` and labels `tests`.
inline std::vector<ClassLabel> fit_predict(Method method, const std::vector<EmbeddingRecord>& train,
                                           const std::vector<EmbeddingRecord>& tests, const ProtocolConfig& cfg,
                                           const std::string& model_id, std::vector<std::string>& warnings) {
  std::vector<ClassLabel> out(tests.size());
  if (method == Method::Distance) {
    const auto index = build_index(train, cfg.strict);
    warnings.insert(warnings.end(), index.warnings().begin(), index.warnings().end());
    const auto preds = classify_batch(tests, index, cfg.threads);
    for (std::size_t i = 0; i < preds.size(); ++i) out[i] = preds[i].label;
  } else {
    const auto result = train_probe_records(train, cfg, model_id);
    for (std::size_t i = 0; i < tests.size(); ++i) out[i] = predict(result, tests[i].vector).label;
  }
  return out;
}

}  // namespace detail

/// Trains once per store on `train_ids` and scores each (test source, ids) cell.
inline std::vector<ReportCell> evaluate_cells(const std::vector<EmbeddingStore>& stores, const Manifest& m,
                                              const std::vector<std::string>& train_ids,
                                              const std::vector<std::pair<std::string, std::vector<std::string>>>& cells,
                                              const std::string& row_label, const ProtocolConfig& cfg,
                                              std::vector<std::string>& warnings) {
  std::vector<std::string> all_test;
  std::unordered_set<std::string> seen;
  for (const auto& [_, ids] : cells) {
    for (const auto& id : ids) {
      if (seen.insert(id).second) all_test.push_back(id);
    }
  }
  std::vector<ReportCell> out;
  for (const auto& store : stores) {
    const auto train = detail::gather(store, m, train_ids, cfg.l2_normalize);
    const auto tests = detail::gather(store, m, all_test, cfg.l2_normalize);
    const auto preds = detail::fit_predict(cfg.method, train, tests, cfg, store.model_id(), warnings);
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < tests.size(); ++i) pos.emplace(tests[i].id, i);
    for (const auto& [source, ids] : cells) {
      std::vector<ClassLabel> p, y;
      for (const auto& id : ids) {
        const auto i = pos.at(id);
        p.push_back(preds[i]);
        y.push_back(tests[i].class_label);
      }
      out.push_back({row_label, store.model_id(), source, per_class_f1(p, y)});
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::string> fake_sources(const Manifest& m) {
  std::vector<std::string> out;
  for (const auto& v : m.videos()) {
    if (v.class_label == ClassLabel::Fake) out.push_back(v.source);
  }
  sort_sources(out);
  return out;
}

inline std::unordered_map<std::string, std::string> source_of_clip(const Manifest& m) {
  std::unordered_map<std::string, std::string> out;
  for (const auto& c : m.clips()) out.emplace(c.clip_id, m.parent_of(c).source);
  return out;
}

/// Per-source cells: each source's ids plus the shared real ids.
inline std::vector<std::pair<std::string, std::vector<std::string>>> make_cells(
    const Manifest& m, const std::vector<std::string>& ids, const std::vector<std::string>& sources) {
  const auto src = source_of_clip(m);
  std::vector<std::string> reals;
  std::map<std::string, std::vector<std::string>> fakes;
  for (const auto& id : ids) {
    const auto& v = m.parent_of(*m.find_clip(id));
    if (v.class_label == ClassLabel::Real) reals.push_back(id);
    else fakes[v.source].push_back(id);
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> cells;
  for (const auto& s : sources) {
    auto it = fakes.find(s);
    if (it == fakes.end()) continue;
    std::vector<std::string> cell = it->second;
    cell.insert(cell.end(), reals.begin(), reals.end());
    cells.emplace_back(s, std::move(cell));
  }
  return cells;
}

inline void require_stores(const std::vector<EmbeddingStore>& stores) {
  if (stores.empty()) throw Error(ErrorCode::InvalidArgument, "no embedding store given");
}

}  // namespace detail

/// Train (or build references) on one generator plus half of the real
/// videos; test on every other generator plus the other half of the reals.
inline EvalReport run_one_to_many(const std::vector<EmbeddingStore>& stores, const Manifest& m,
                                  const std::string& train_source, const ProtocolConfig& cfg) {
  detail::require_stores(stores);
  const auto train = canonical_source(train_source);
  auto tests = detail::fake_sources(m);
  tests.erase(std::remove(tests.begin(), tests.end(), train), tests.end());

  SplitSpec spec{Protocol::OneToMany, {train}, tests, cfg.seed, cfg.train_fraction};
  auto split = make_split(m, spec);

  std::vector<std::string> columns = tests;
  if (cfg.fill_diagonal) {
    // Re-split the training source so its held-out half can fill the diagonal cell.
    SplitSpec diag{Protocol::ManyToMany, {train}, {train}, cfg.seed, cfg.train_fraction};
    split = make_split(m, diag);
    const auto one = make_split(m, spec);
    std::unordered_set<std::string> seen(split.test.begin(), split.test.end());
    for (const auto& id : one.test) {
      if (seen.insert(id).second) split.test.push_back(id);
    }
    columns.push_back(train);
    sort_sources(columns);
  }

  EvalReport report{std::string(protocol_name(Protocol::OneToMany)), std::string(method_name(cfg.method)), {}, {}};
  const auto cells = detail::make_cells(m, split.test, columns);
  report.cells = evaluate_cells(stores, m, split.train, cells, cfg.row_label.empty() ? train : cfg.row_label, cfg,
                                report.warnings);
  return report;
}

/// Train on the requested generators (origin-disjoint halves) plus half of
/// the reals; test on the held-out clips of every generator.
inline EvalReport run_many_to_many(const std::vector<EmbeddingStore>& stores, const Manifest& m,
                                   const std::vector<std::string>& train_sources, const ProtocolConfig& cfg) {
  detail::require_stores(stores);
  if (train_sources.empty()) throw Error(ErrorCode::InvalidArgument, "no training sources given");
  auto train = detail::canonical_list(train_sources);
  for (const auto& s : train) {
    for (const auto& t : cfg.test_only_sources) {
      if (canonical_source(t) == s) throw Error(ErrorCode::InvalidArgument, "source '" + s + "' is test-only");
    }
  }
  const auto tests = detail::fake_sources(m);
  SplitSpec spec{Protocol::ManyToMany, train, tests, cfg.seed, cfg.train_fraction};
  const auto split = make_split(m, spec);

  std::string label = cfg.row_label;
  if (label.empty()) {
    for (const auto& s : train) label += (label.empty() ? "" : "+") + s;
  }
  EvalReport report{std::string(protocol_name(Protocol::ManyToMany)), std::string(method_name(cfg.method)), {}, {}};
  if (cfg.diagnostic_leak) {
    report.warnings.push_back("diagnostic mode: test cells reuse training clips");
    const auto cells = detail::make_cells(m, split.train, train);
    report.cells = evaluate_cells(stores, m, split.train, cells, label, cfg, report.warnings);
  } else {
    const auto cells = detail::make_cells(m, split.test, tests);
    report.cells = evaluate_cells(stores, m, split.train, cells, label, cfg, report.warnings);
  }
  return report;
}

/// Direct evaluation between two stores without a manifest: every record of
/// `train_store` is training/reference data, every record of `test_store` is
/// scored. With `per_source`, one cell per generator (plus all reals);
/// otherwise a single cell named "all".
inline EvalReport evaluate_stores(const EmbeddingStore& train_store, const EmbeddingStore& test_store,
                                  bool per_source, const ProtocolConfig& cfg, const std::string& train_label = "refs") {
  if (train_store.dim() != test_store.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "reference dim " + std::to_string(train_store.dim()) + " vs test dim " +
                                                  std::to_string(test_store.dim()));
  }
  auto train = train_store.records();
  auto tests = test_store.records();
  if (cfg.l2_normalize) {
    for (auto& r : train) l2_normalize(r.vector);
    for (auto& r : tests) l2_normalize(r.vector);
  }
  EvalReport report{"direct", std::string(method_name(cfg.method)), {}, {}};
  if (train_store.model_id() != test_store.model_id()) {
    report.warnings.push_back("stores come from different encoders: '" + train_store.model_id() + "' and '" +
                              test_store.model_id() + "'");
  }
  const auto preds = detail::fit_predict(cfg.method, train, tests, cfg, train_store.model_id(), report.warnings);

  std::vector<std::string> sources;
  for (const auto& r : tests) {
    if (r.class_label == ClassLabel::Fake) sources.push_back(canonical_source(r.source));
  }
  sort_sources(sources);
  auto score = [&](auto&& keep) {
    std::vector<ClassLabel> p, y;
    for (std::size_t i = 0; i < tests.size(); ++i) {
      if (keep(tests[i])) {
        p.push_back(preds[i]);
        y.push_back(tests[i].class_label);
      }
    }
    return per_class_f1(p, y);
  };
  if (per_source) {
    for (const auto& s : sources) {
      report.cells.push_back({train_label, train_store.model_id(), s, score([&](const EmbeddingRecord& r) {
                                return r.class_label == ClassLabel::Real || canonical_source(r.source) == s;
                              })});
    }
  } else {
    report.cells.push_back({train_label, train_store.model_id(), "all", score([](const EmbeddingRecord&) { return true; })});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

enum class ReportFormat { Table, Csv, Jsonl };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "table" || s == "table-text") return ReportFormat::Table;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "jsonl") return ReportFormat::Jsonl;
  throw Error(ErrorCode::InvalidArgument, "format must be table, csv or jsonl, got '" + std::string(s) + "'");
}

/// Score in [0, 1] as a percentage with one decimal, e.g. 0.66666 -> "66.7".
inline std::string format_score(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", x * 100.0);
  return buf;
}

/// Column slugs: the nine generators in their fixed order, then any other
/// test sources present in the report.
inline std::vector<std::string> report_columns(const EvalReport& r) {
  std::vector<std::string> cols;
  for (const auto& info : kFakeSources) cols.emplace_back(info.slug);
  std::vector<std::string> extra;
  for (const auto& c : r.cells) {
    if (source_rank(c.test) == kFakeSources.size()) extra.push_back(c.test);
  }
  std::sort(extra.begin(), extra.end());
  extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
  cols.insert(cols.end(), extra.begin(), extra.end());
  return cols;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

struct RowKey {
  std::string train;
  std::string model;
  bool operator==(const RowKey&) const = default;
};

inline std::vector<RowKey> row_keys(const EvalReport& r) {
  std::vector<RowKey> keys;
  for (const auto& c : r.cells) {
    RowKey k{c.train, c.model};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(std::move(k));
  }
  return keys;
}

inline const ReportCell* find_cell(const EvalReport& r, const RowKey& k, const std::string& test) {
  for (const auto& c : r.cells) {
    if (c.train == k.train && c.model == k.model && c.test == test) return &c;
  }
  return nullptr;
}

struct Metric {
  const char* name;
  double ClassScores::*field;
};

inline constexpr Metric kMetrics[] = {
    {"F1-Real", &ClassScores::f1_real},
    {"F1-Fake", &ClassScores::f1_fake},
    {"Accuracy", &ClassScores::accuracy},
};

inline std::string render_csv(const EvalReport& r) {
  const auto cols = report_columns(r);
  std::string out = "train,model,metric";
  for (const auto& c : cols) out += "," + csv_field(display_name(c));
  out += '\n';
  for (const auto& key : row_keys(r)) {
    for (const auto& metric : kMetrics) {
      out += csv_field(key.train) + "," + csv_field(key.model) + "," + metric.name;
      for (const auto& col : cols) {
        const auto* cell = find_cell(r, key, col);
        out += "," + (cell ? format_score(cell->scores.*metric.field) : std::string("-"));
      }
      out += '\n';
    }
  }
  return out;
}

inline std::string render_jsonl(const EvalReport& r) {
  nlohmann::ordered_json header;
  header["format_version"] = 1;
  header["protocol"] = r.protocol;
  header["method"] = r.method;
  std::string out = header.dump() + "\n";
  const auto cols = report_columns(r);
  for (const auto& key : row_keys(r)) {
    for (const auto& col : cols) {
      const auto* cell = find_cell(r, key, col);
      if (!cell) continue;
      nlohmann::ordered_json j;
      j["train"] = cell->train;
      j["model"] = cell->model;
      j["test"] = cell->test;
      j["f1_real"] = std::stod(format_score(cell->scores.f1_real));
      j["f1_fake"] = std::stod(format_score(cell->scores.f1_fake));
      j["accuracy"] = std::stod(format_score(cell->scores.accuracy));
      j["tp"] = cell->scores.counts.tp;
      j["fp"] = cell->scores.counts.fp;
      j["tn"] = cell->scores.counts.tn;
      j["fn"] = cell->scores.counts.fn;
      out += j.dump() + "\n";
    }
  }
  return out;
}

inline std::string render_table(const EvalReport& r) {
  const auto cols = report_columns(r);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Train", "Model", "Metric"};
  for (const auto& c : cols) head.push_back(display_name(c));
  rows.push_back(head);
  for (const auto& key : row_keys(r)) {
    std::string train_display;
    for (std::size_t pos = 0; pos <= key.train.size();) {
      const auto next = std::min(key.train.find('+', pos), key.train.size());
      if (!train_display.empty()) train_display += "+";
      train_display += display_name(key.train.substr(pos, next - pos));
      pos = next + 1;
    }
    for (const auto& metric : kMetrics) {
      std::vector<std::string> row{train_display, key.model, metric.name};
      for (const auto& col : cols) {
        const auto* cell = find_cell(r, key, col);
        row.push_back(cell ? format_score(cell->scores.*metric.field) : "-");
      }
      rows.push_back(std::move(row));
    }
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    for (std::size_t i = 0; i < rows[ri].size(); ++i) {
      const auto& cell = rows[ri][i];
      if (i > 0) out += " | ";
      // Text columns left-aligned, scores right-aligned.
      if (i < 3) out += cell + std::string(width[i] - cell.size(), ' ');
      else out += std::string(width[i] - cell.size(), ' ') + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    if (ri == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      out += std::string(total + 3 * (width.size() - 1), '-') + '\n';
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_report(const EvalReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::Table: return detail::render_table(r);
    case ReportFormat::Csv: return detail::render_csv(r);
    case ReportFormat::Jsonl: return detail::render_jsonl(r);
  }
  return {};
}

/// Reads a JSONL report back. Scores are recomputed from the stored counts,
/// so re-rendering reproduces the original exactly.
inline EvalReport parse_report_jsonl(std::istream& in) {
  EvalReport r;
  bool have_header = false;
  detail::for_each_json_line(in, [&](const nlohmann::json& obj, std::size_t line) {
    if (!have_header) {
      if (detail::json_field<int>(obj, "format_version", line) != 1) {
        throw Error(ErrorCode::UnsupportedFormat, "report format_version");
      }
      r.protocol = detail::json_field<std::string>(obj, "protocol", line);
      r.method = detail::json_field<std::string>(obj, "method", line);
      have_header = true;
      return;
    }
    ConfusionCounts c{detail::json_field<std::uint64_t>(obj, "tp", line), detail::json_field<std::uint64_t>(obj, "fp", line),
                      detail::json_field<std::uint64_t>(obj, "tn", line), detail::json_field<std::uint64_t>(obj, "fn", line)};
    r.cells.push_back({detail::json_field<std::string>(obj, "train", line), detail::json_field<std::string>(obj, "model", line),
                       detail::json_field<std::string>(obj, "test", line), ClassScores::from_counts(c)});
  });
  if (!have_header) throw Error(ErrorCode::UnsupportedFormat, "report has no header line");
  return r;
}

}  // namespace vidprobe

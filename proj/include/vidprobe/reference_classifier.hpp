#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vidprobe/embedding_store.hpp"
#include "vidprobe/error.hpp"
#include "vidprobe/label.hpp"
#include "vidprobe/parallel.hpp"

namespace vidprobe {

/// Labeled reference embeddings for the training-free classifier. Row order
/// is insertion order and decides ties.
class ReferenceIndex {
 public:
  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const float> row(std::size_t r) const { return {vectors_.data() + r * dim_, dim_}; }
  ClassLabel label(std::size_t r) const { return labels_[r]; }
  const std::string& source(std::size_t r) const { return sources_[r]; }
  const std::string& id(std::size_t r) const { return ids_[r]; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend ReferenceIndex build_index(std::span<const EmbeddingRecord>, bool);

  std::size_t dim_ = 0;
  std::vector<float> vectors_;
  std::vector<ClassLabel> labels_;
  std::vector<std::string> sources_;
  std::vector<std::string> ids_;
  std::vector<std::string> warnings_;
};

/// A reference set lacking one of the classes is allowed with a warning,
/// unless `strict` is set.
inline ReferenceIndex build_index(std::span<const EmbeddingRecord> refs, bool strict = false) {
  if (refs.empty()) throw Error(ErrorCode::InvalidArgument, "reference set is empty");
  ReferenceIndex idx;
  idx.dim_ = refs.front().vector.size();
  if (idx.dim_ == 0) throw Error(ErrorCode::DimensionMismatch, "reference vectors are empty");
  idx.vectors_.reserve(refs.size() * idx.dim_);
  std::size_t n_real = 0;
  for (const auto& r : refs) {
    if (r.vector.size() != idx.dim_) {
      throw Error(ErrorCode::DimensionMismatch, "reference '" + r.id + "' has length " +
                                                    std::to_string(r.vector.size()) + ", expected " +
                                                    std::to_string(idx.dim_));
    }
    if (!all_finite(std::span<const float>(r.vector))) {
      throw Error(ErrorCode::InvalidFeature, "reference '" + r.id + "'");
    }
    idx.vectors_.insert(idx.vectors_.end(), r.vector.begin(), r.vector.end());
    idx.labels_.push_back(r.class_label);
    idx.sources_.push_back(r.source);
    idx.ids_.push_back(r.id);
    if (r.class_label == ClassLabel::Real) ++n_real;
  }
  if (n_real == 0 || n_real == refs.size()) {
    const std::string msg = std::string("reference set has no ") + (n_real == 0 ? "real" : "fake") + " videos";
    if (strict) throw Error(ErrorCode::DegenerateLabels, msg);
    idx.warnings_.push_back(msg);
  }
  return idx;
}

inline ReferenceIndex build_index(const std::vector<EmbeddingRecord>& refs, bool strict = false) {
  return build_index(std::span<const EmbeddingRecord>(refs), strict);
}

struct DistancePrediction {
  ClassLabel label = ClassLabel::Real;
  std::size_t nearest = 0;
  double nearest_distance = 0.0;
  // Per-class minima; infinity when the class has no references.
  double min_real_distance = std::numeric_limits<double>::infinity();
  double min_fake_distance = std::numeric_limits<double>::infinity();

  bool operator==(const DistancePrediction&) const = default;
};

/// Label of the nearest reference under Euclidean distance, by exhaustive
/// scan. Exact ties go to the lowest reference index.
inline DistancePrediction classify(std::span<const float> test, const ReferenceIndex& index) {
  if (test.size() != index.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "test vector has length " + std::to_string(test.size()) + ", index dim is " + std::to_string(index.dim()));
  }
  double best = std::numeric_limits<double>::infinity();
  double best_real = best, best_fake = best;
  std::size_t arg = 0;
  for (std::size_t r = 0; r < index.size(); ++r) {
    const double d2 = squared_distance(test, index.row(r));
    if (d2 < best) {
      best = d2;
      arg = r;
    }
    double& cls = index.label(r) == ClassLabel::Real ? best_real : best_fake;
    if (d2 < cls) cls = d2;
  }
  DistancePrediction p;
  p.nearest = arg;
  p.label = index.label(arg);
  p.nearest_distance = std::sqrt(best);
  p.min_real_distance = std::sqrt(best_real);
  p.min_fake_distance = std::sqrt(best_fake);
  return p;
}

inline DistancePrediction classify(const std::vector<float>& test, const ReferenceIndex& index) {
  return classify(std::span<const float>(test), index);
}

/// Same result as calling classify on each record in order. Dimensions are
/// checked up front so the first offending id is the one reported.
inline std::vector<DistancePrediction> classify_batch(std::span<const EmbeddingRecord> tests,
                                                      const ReferenceIndex& index, unsigned threads = 1) {
  for (const auto& t : tests) {
    if (t.vector.size() != index.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "test record '" + t.id + "' has length " +
                                                    std::to_string(t.vector.size()) + ", index dim is " +
                                                    std::to_string(index.dim()));
    }
  }
  std::vector<DistancePrediction> out(tests.size());
  parallel_for(tests.size(), threads, [&](std::size_t i) { out[i] = classify(tests[i].vector, index); });
  return out;
}

inline std::vector<DistancePrediction> classify_batch(const std::vector<EmbeddingRecord>& tests,
                                                      const ReferenceIndex& index, unsigned threads = 1) {
  return classify_batch(std::span<const EmbeddingRecord>(tests), index, threads);
}

}  // namespace vidprobe

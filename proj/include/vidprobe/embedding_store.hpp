#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vidprobe/binary_io.hpp"
#include "vidprobe/error.hpp"
#include "vidprobe/label.hpp"

namespace vidprobe {

// ---------------------------------------------------------------------------
// Vector primitives
//
// All accumulation is sequential in index order with one double accumulator
// per component, so results do not depend on threading or call site.
// ---------------------------------------------------------------------------

template <typename T>
bool all_finite(std::span<const T> v) {
  for (T x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

/// Row-major block of per-frame features for one video (frames x dim).
class FrameFeatureBlock {
 public:
  FrameFeatureBlock() = default;

  FrameFeatureBlock(std::size_t frames, std::size_t dim, std::vector<float> values)
      : frames_(frames), dim_(dim), values_(std::move(values)) {
    if (values_.size() != frames_ * dim_) {
      throw Error(ErrorCode::DimensionMismatch, "frame block holds " + std::to_string(values_.size()) +
                                                    " values, expected " + std::to_string(frames_ * dim_));
    }
  }

  static FrameFeatureBlock from_rows(const std::vector<std::vector<float>>& rows) {
    if (rows.empty()) return {};
    const std::size_t dim = rows.front().size();
    std::vector<float> values;
    values.reserve(rows.size() * dim);
    for (const auto& r : rows) {
      if (r.size() != dim) throw Error(ErrorCode::DimensionMismatch, "frame rows differ in length");
      values.insert(values.end(), r.begin(), r.end());
    }
    return FrameFeatureBlock(rows.size(), dim, std::move(values));
  }

  std::size_t frames() const { return frames_; }
  std::size_t dim() const { return dim_; }
  std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

 private:
  std::size_t frames_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

/// Video-level feature: elementwise mean over all frames.
inline std::vector<float> average_frame_features(const FrameFeatureBlock& block) {
  if (block.frames() == 0) throw Error(ErrorCode::NoFrames, "");
  std::vector<double> acc(block.dim(), 0.0);
  for (std::size_t i = 0; i < block.frames(); ++i) {
    auto row = block.row(i);
    if (!all_finite(row)) {
      throw Error(ErrorCode::InvalidFeature, "frame " + std::to_string(i) + " has a non-finite entry");
    }
    for (std::size_t j = 0; j < row.size(); ++j) acc[j] += static_cast<double>(row[j]);
  }
  std::vector<float> out(block.dim());
  const auto n = static_cast<double>(block.frames());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<float>(acc[j] / n);
  return out;
}

template <typename A, typename B>
double squared_distance(std::span<const A> a, std::span<const B> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = static_cast<double>(a[j]) - static_cast<double>(b[j]);
    acc += d * d;
  }
  return acc;
}

template <typename A, typename B>
double euclidean_distance(std::span<const A> a, std::span<const B> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double euclidean_distance(const std::vector<float>& a, const std::vector<float>& b) {
  return euclidean_distance(std::span<const float>(a), std::span<const float>(b));
}

inline double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
  return euclidean_distance(std::span<const double>(a), std::span<const double>(b));
}

/// Optional preprocessing, off unless explicitly requested. Zero vectors are left as is.
inline void l2_normalize(std::vector<float>& v) {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * x;
  if (acc == 0.0) return;
  const double inv = 1.0 / std::sqrt(acc);
  for (float& x : v) x = static_cast<float>(x * inv);
}

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

struct EmbeddingRecord {
  std::string id;
  ClassLabel class_label = ClassLabel::Real;
  std::string source;
  std::vector<float> vector;
};

/// Records compare bitwise on their payload, so -0.0 != 0.0 here.
inline bool operator==(const EmbeddingRecord& a, const EmbeddingRecord& b) {
  return a.id == b.id && a.class_label == b.class_label && a.source == b.source &&
         a.vector.size() == b.vector.size() &&
         (a.vector.empty() ||
          std::memcmp(a.vector.data(), b.vector.data(), a.vector.size() * sizeof(float)) == 0);
}

/// Collection of embeddings produced by one encoder. Every record shares `dim`
/// and ids are unique; `add` enforces both.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  EmbeddingStore(std::string model_id, std::uint32_t dim) : model_id_(std::move(model_id)), dim_(dim) {
    if (dim_ == 0) throw Error(ErrorCode::InvariantViolation, "store dimension must be positive");
  }

  void add(EmbeddingRecord rec) {
    if (rec.id.empty()) throw Error(ErrorCode::InvariantViolation, "record id is empty");
    if (rec.vector.size() != dim_) {
      throw Error(ErrorCode::DimensionMismatch, "record '" + rec.id + "' has length " +
                                                    std::to_string(rec.vector.size()) + ", store dim is " +
                                                    std::to_string(dim_));
    }
    if (!all_finite(std::span<const float>(rec.vector))) {
      throw Error(ErrorCode::InvalidFeature, "record '" + rec.id + "' has a non-finite entry");
    }
    if (index_.contains(rec.id)) throw Error(ErrorCode::DuplicateRecord, rec.id);
    index_.emplace(rec.id, records_.size());
    records_.push_back(std::move(rec));
  }

  const std::string& model_id() const { return model_id_; }
  std::uint32_t dim() const { return dim_; }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const EmbeddingRecord* find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.model_id_ == b.model_id_ && a.dim_ == b.dim_ && a.records_ == b.records_;
  }

 private:
  std::string model_id_;
  std::uint32_t dim_ = 0;
  std::vector<EmbeddingRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// VAEB binary format (little-endian):
//   "VAEB" | u32 version=1 | str16 model_id | u32 dim | u64 count |
//   count x { str16 id | u8 label | str16 source | dim x f32 }
// ---------------------------------------------------------------------------

inline constexpr std::string_view kStoreMagic = "VAEB";
inline constexpr std::uint32_t kStoreVersion = 1;

inline std::string serialize_store(const EmbeddingStore& store) {
  if (store.dim() == 0) throw Error(ErrorCode::InvariantViolation, "store dimension must be positive");
  binary::Writer w;
  w.bytes(kStoreMagic);
  w.uint(kStoreVersion);
  w.str16(store.model_id());
  w.uint(store.dim());
  w.uint(static_cast<std::uint64_t>(store.size()));
  for (const auto& r : store.records()) {
    w.str16(r.id);
    w.uint(static_cast<std::uint8_t>(r.class_label));
    w.str16(r.source);
    for (float x : r.vector) w.f32(x);
  }
  return std::move(w).take();
}

inline EmbeddingStore parse_store(std::string_view bytes) {
  binary::Reader r(bytes, ErrorCode::CorruptStore);
  if (bytes.substr(0, kStoreMagic.size()) != kStoreMagic) {
    throw Error(ErrorCode::UnsupportedFormat, "missing VAEB magic");
  }
  r.bytes(4);
  const auto version = r.uint<std::uint32_t>();
  if (version != kStoreVersion) {
    throw Error(ErrorCode::UnsupportedFormat, "store version " + std::to_string(version));
  }
  auto model_id = r.str16();
  const auto dim = r.uint<std::uint32_t>();
  if (dim == 0) throw Error(ErrorCode::CorruptStore, "dimension is zero");
  const auto count = r.uint<std::uint64_t>();
  // Smallest possible record: two empty strings, a label byte and the payload.
  const std::uint64_t min_record = 2 + 1 + 2 + std::uint64_t{dim} * 4;
  if (count > r.remaining() / min_record) {
    throw Error(ErrorCode::CorruptStore, "record count " + std::to_string(count) + " exceeds file size");
  }

  EmbeddingStore store(std::move(model_id), dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    EmbeddingRecord rec;
    rec.id = r.str16();
    const auto label = r.uint<std::uint8_t>();
    if (label > 1) throw Error(ErrorCode::CorruptStore, "bad class label byte in record " + std::to_string(i));
    rec.class_label = static_cast<ClassLabel>(label);
    rec.source = r.str16();
    rec.vector.resize(dim);
    for (auto& x : rec.vector) x = r.f32();
    if (rec.id.empty()) throw Error(ErrorCode::CorruptStore, "empty record id at index " + std::to_string(i));
    store.add(std::move(rec));
  }
  if (!r.at_end()) throw Error(ErrorCode::CorruptStore, "trailing bytes after last record");
  return store;
}

/// Writes the store atomically and returns the number of bytes written.
inline std::size_t write_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  const auto bytes = serialize_store(store);
  binary::write_file_atomic(path, bytes);
  return bytes.size();
}

inline EmbeddingStore read_store(const std::filesystem::path& path) {
  return parse_store(binary::read_file(path));
}

}  // namespace vidprobe

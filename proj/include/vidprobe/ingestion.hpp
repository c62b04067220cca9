#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vidprobe/binary_io.hpp"
#include "vidprobe/error.hpp"
#include "vidprobe/label.hpp"
#include "vidprobe/sources.hpp"

namespace vidprobe {

inline constexpr double kDefaultClipLength = 2.0;
inline constexpr int kManifestFormatVersion = 1;

struct VideoEntry {
  std::string video_id;
  std::string source;
  ClassLabel class_label = ClassLabel::Fake;
  double duration = 0.0;  // seconds
  double fps = 0.0;
  std::string origin_video_id;
  std::optional<std::string> resolution;
  std::optional<std::string> metadata;
};

struct ClipEntry {
  std::string clip_id;
  std::string parent;
  double start = 0.0;
  double end = 0.0;
};

struct ClipInterval {
  double start;
  double end;
  bool operator==(const ClipInterval&) const = default;
};

/// Consecutive [k*L, (k+1)*L) windows that fit inside [0, duration]. The
/// trailing remainder shorter than L is dropped. A relative slack of 1e-9
/// absorbs representation error, so 0.6 s splits into three 0.2 s clips.
inline std::vector<ClipInterval> compute_clip_boundaries(double duration, double clip_length) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::InvalidArgument, "duration must be positive, got " + std::to_string(duration));
  }
  if (!(clip_length > 0.0) || !std::isfinite(clip_length)) {
    throw Error(ErrorCode::InvalidArgument, "clip length must be positive, got " + std::to_string(clip_length));
  }
  const auto count = static_cast<std::size_t>(std::floor(duration / clip_length + 1e-9));
  std::vector<ClipInterval> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back({static_cast<double>(k) * clip_length, static_cast<double>(k + 1) * clip_length});
  }
  return out;
}

inline std::string make_clip_id(const std::string& video_id, std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%04zu", k);
  return video_id + buf;
}

class Manifest {
 public:
  explicit Manifest(double clip_length = kDefaultClipLength) : clip_length_(clip_length) {
    if (!(clip_length_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "clip length must be positive");
  }

  /// Adds the video together with its clips.
  void add_video(VideoEntry video) {
    validate_video(video);
    const auto intervals = compute_clip_boundaries(video.duration, clip_length_);
    for (std::size_t k = 0; k < intervals.size(); ++k) {
      add_clip_unchecked({make_clip_id(video.video_id, k), video.video_id, intervals[k].start, intervals[k].end});
    }
    insert_video(std::move(video));
  }

  /// Adds a video whose clips are supplied explicitly (used when loading a manifest).
  void add_video_with_clips(VideoEntry video, std::vector<ClipEntry> clips) {
    validate_video(video);
    double last_end = 0.0;
    for (const auto& c : clips) {
      if (c.parent != video.video_id) throw Error(ErrorCode::InvariantViolation, "clip '" + c.clip_id + "' has wrong parent");
      const double tol = 1e-9 * std::max(1.0, video.duration);
      if (c.start < last_end - tol || c.end > video.duration + tol) {
        throw Error(ErrorCode::InvariantViolation, "clip '" + c.clip_id + "' overlaps or exceeds its parent");
      }
      if (std::abs((c.end - c.start) - clip_length_) > 1e-9 * std::max(1.0, clip_length_)) {
        throw Error(ErrorCode::InvariantViolation, "clip '" + c.clip_id + "' length differs from clip_length");
      }
      last_end = c.end;
    }
    for (auto& c : clips) add_clip_unchecked(std::move(c));
    insert_video(std::move(video));
  }

  double clip_length() const { return clip_length_; }
  const std::vector<VideoEntry>& videos() const { return videos_; }
  const std::vector<ClipEntry>& clips() const { return clips_; }

  const VideoEntry& video(const std::string& video_id) const {
    auto it = video_index_.find(video_id);
    if (it == video_index_.end()) throw Error(ErrorCode::InvariantViolation, "unknown video '" + video_id + "'");
    return videos_[it->second];
  }

  const VideoEntry& parent_of(const ClipEntry& clip) const { return video(clip.parent); }

  const ClipEntry* find_clip(const std::string& clip_id) const {
    auto it = clip_index_.find(clip_id);
    return it == clip_index_.end() ? nullptr : &clips_[it->second];
  }

 private:
  static void validate_video(const VideoEntry& v) {
    if (v.video_id.empty()) throw Error(ErrorCode::InvariantViolation, "video id is empty");
    if (!(v.duration > 0.0) || !std::isfinite(v.duration)) {
      throw Error(ErrorCode::InvariantViolation, "video '" + v.video_id + "' has non-positive duration");
    }
    if (!(v.fps > 0.0) || !std::isfinite(v.fps)) {
      throw Error(ErrorCode::InvariantViolation, "video '" + v.video_id + "' has non-positive fps");
    }
    if (v.origin_video_id.empty()) throw Error(ErrorCode::InvariantViolation, "video '" + v.video_id + "' has no origin id");
  }

  void insert_video(VideoEntry v) {
    if (video_index_.contains(v.video_id)) throw Error(ErrorCode::DuplicateRecord, "video '" + v.video_id + "'");
    video_index_.emplace(v.video_id, videos_.size());
    videos_.push_back(std::move(v));
  }

  void add_clip_unchecked(ClipEntry c) {
    if (clip_index_.contains(c.clip_id)) throw Error(ErrorCode::DuplicateRecord, "clip '" + c.clip_id + "'");
    clip_index_.emplace(c.clip_id, clips_.size());
    clips_.push_back(std::move(c));
  }

  double clip_length_;
  std::vector<VideoEntry> videos_;
  std::vector<ClipEntry> clips_;
  std::unordered_map<std::string, std::size_t> video_index_;
  std::unordered_map<std::string, std::size_t> clip_index_;
};

struct IngestConfig {
  double clip_length = kDefaultClipLength;
  std::vector<std::string> real_sources{std::string(kDefaultRealSource)};
  bool allow_unknown_source = false;
};

/// One line of a listing file, before label assignment.
struct ListingEntry {
  std::string video_id;
  std::string source;
  double duration = 0.0;
  double fps = 0.0;
  std::optional<std::string> origin_video_id;
  std::optional<std::string> class_label;
  std::optional<std::string> resolution;
  std::optional<std::string> metadata;
};

namespace detail {

template <typename T>
T json_field(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(line) + ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(line) + ": field '" + key + "' has wrong type");
  }
}

inline std::optional<std::string> json_opt_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return json_field<std::string>(obj, key, line);
}

/// Calls fn(json, line_number) for each non-blank line.
template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(n) + ": " + e.what());
    }
    if (!obj.is_object()) throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(n) + ": expected an object");
    fn(obj, n);
  }
}

}  // namespace detail

/// Parses a JSONL listing: one object per video with video_id, source,
/// duration and fps; origin_video_id, class_label, resolution and metadata are optional.
inline std::vector<ListingEntry> parse_listing(std::istream& in) {
  std::vector<ListingEntry> out;
  detail::for_each_json_line(in, [&](const nlohmann::json& obj, std::size_t line) {
    ListingEntry e;
    e.video_id = detail::json_field<std::string>(obj, "video_id", line);
    e.source = detail::json_field<std::string>(obj, "source", line);
    e.duration = detail::json_field<double>(obj, "duration", line);
    e.fps = detail::json_field<double>(obj, "fps", line);
    e.origin_video_id = detail::json_opt_string(obj, "origin_video_id", line);
    e.class_label = detail::json_opt_string(obj, "class_label", line);
    e.resolution = detail::json_opt_string(obj, "resolution", line);
    e.metadata = detail::json_opt_string(obj, "metadata", line);
    out.push_back(std::move(e));
  });
  return out;
}

inline std::vector<ListingEntry> read_listing(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_listing(in);
}

inline void write_listing(const std::vector<ListingEntry>& listing, std::ostream& out) {
  for (const auto& e : listing) {
    nlohmann::ordered_json j;
    j["video_id"] = e.video_id;
    j["source"] = e.source;
    j["duration"] = e.duration;
    j["fps"] = e.fps;
    if (e.origin_video_id) j["origin_video_id"] = *e.origin_video_id;
    if (e.class_label) j["class_label"] = *e.class_label;
    if (e.resolution) j["resolution"] = *e.resolution;
    if (e.metadata) j["metadata"] = *e.metadata;
    out << j.dump() << '\n';
  }
}

/// Label is Real exactly when the source is one of the configured real corpora.
inline Manifest build_manifest(const std::vector<ListingEntry>& listing, const IngestConfig& config = {}) {
  std::unordered_set<std::string> real;
  for (const auto& s : config.real_sources) real.insert(canonical_source(s));

  Manifest m(config.clip_length);
  for (const auto& e : listing) {
    VideoEntry v;
    v.video_id = e.video_id;
    v.source = canonical_source(e.source);
    const bool is_real = real.contains(v.source);
    if (!is_real && !is_known_fake_source(v.source) && !config.allow_unknown_source) {
      throw Error(ErrorCode::UnknownSource, "'" + e.source + "' (video '" + e.video_id + "')");
    }
    v.class_label = is_real ? ClassLabel::Real : ClassLabel::Fake;
    if (e.class_label && parse_label(*e.class_label) != v.class_label) {
      throw Error(ErrorCode::InvariantViolation, "video '" + e.video_id + "' is labelled " + *e.class_label +
                                                     " but source '" + v.source + "' implies " +
                                                     std::string(label_name(v.class_label)));
    }
    v.duration = e.duration;
    v.fps = e.fps;
    v.origin_video_id = e.origin_video_id.value_or(e.video_id);
    v.resolution = e.resolution;
    v.metadata = e.metadata;
    m.add_video(std::move(v));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Manifest file: a header line {"format_version":1,"clip_length":L} followed
// by one clip per line.
// ---------------------------------------------------------------------------

inline void write_manifest(const Manifest& m, std::ostream& out) {
  nlohmann::ordered_json header;
  header["format_version"] = kManifestFormatVersion;
  header["clip_length"] = m.clip_length();
  out << header.dump() << '\n';
  for (const auto& c : m.clips()) {
    const auto& v = m.parent_of(c);
    nlohmann::ordered_json j;
    j["clip_id"] = c.clip_id;
    j["parent"] = c.parent;
    j["origin_video_id"] = v.origin_video_id;
    j["source"] = v.source;
    j["class_label"] = label_name(v.class_label);
    j["start"] = c.start;
    j["end"] = c.end;
    j["fps"] = v.fps;
    j["duration"] = v.duration;
    if (v.resolution) j["resolution"] = *v.resolution;
    if (v.metadata) j["metadata"] = *v.metadata;
    out << j.dump() << '\n';
  }
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ostringstream os;
  write_manifest(m, os);
  binary::write_file_atomic(path, os.str());
}

inline Manifest parse_manifest(std::istream& in) {
  std::optional<Manifest> m;
  std::vector<std::pair<VideoEntry, std::vector<ClipEntry>>> videos;
  std::unordered_map<std::string, std::size_t> by_parent;

  detail::for_each_json_line(in, [&](const nlohmann::json& obj, std::size_t line) {
    if (!m) {
      const auto version = detail::json_field<int>(obj, "format_version", line);
      if (version != kManifestFormatVersion) {
        throw Error(ErrorCode::UnsupportedFormat, "manifest format_version " + std::to_string(version));
      }
      m.emplace(detail::json_field<double>(obj, "clip_length", line));
      return;
    }
    ClipEntry c;
    c.clip_id = detail::json_field<std::string>(obj, "clip_id", line);
    c.parent = detail::json_field<std::string>(obj, "parent", line);
    c.start = detail::json_field<double>(obj, "start", line);
    c.end = detail::json_field<double>(obj, "end", line);
    auto [it, inserted] = by_parent.try_emplace(c.parent, videos.size());
    if (inserted) {
      VideoEntry v;
      v.video_id = c.parent;
      v.source = detail::json_field<std::string>(obj, "source", line);
      v.class_label = parse_label(detail::json_field<std::string>(obj, "class_label", line));
      v.fps = detail::json_field<double>(obj, "fps", line);
      v.origin_video_id = detail::json_field<std::string>(obj, "origin_video_id", line);
      v.duration = obj.contains("duration") ? detail::json_field<double>(obj, "duration", line) : c.end;
      v.resolution = detail::json_opt_string(obj, "resolution", line);
      v.metadata = detail::json_opt_string(obj, "metadata", line);
      videos.emplace_back(std::move(v), std::vector<ClipEntry>{});
    }
    videos[it->second].second.push_back(std::move(c));
  });

  if (!m) throw Error(ErrorCode::UnsupportedFormat, "manifest has no header line");
  for (auto& [v, clips] : videos) m->add_video_with_clips(std::move(v), std::move(clips));
  return std::move(*m);
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_manifest(in);
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct SourceStats {
  std::string source;
  ClassLabel class_label = ClassLabel::Fake;
  std::size_t videos = 0;
  std::size_t clips = 0;
  double minutes = 0.0;
};

struct ManifestStats {
  std::vector<SourceStats> per_source;  // real sources first, then report column order
  std::size_t total_clips = 0;
  double total_minutes = 0.0;
};

inline ManifestStats manifest_stats(const Manifest& m) {
  std::map<std::string, SourceStats> acc;
  for (const auto& v : m.videos()) {
    auto& s = acc[v.source];
    s.source = v.source;
    s.class_label = v.class_label;
    ++s.videos;
  }
  ManifestStats out;
  for (const auto& c : m.clips()) {
    auto& s = acc[m.parent_of(c).source];
    ++s.clips;
    s.minutes += (c.end - c.start) / 60.0;
  }
  std::vector<std::string> order;
  for (const auto& [k, _] : acc) order.push_back(k);
  sort_sources(order);
  std::stable_partition(order.begin(), order.end(),
                        [&](const std::string& s) { return acc[s].class_label == ClassLabel::Real; });
  for (const auto& s : order) {
    out.total_clips += acc[s].clips;
    out.total_minutes += acc[s].minutes;
    out.per_source.push_back(acc[s]);
  }
  return out;
}

}  // namespace vidprobe

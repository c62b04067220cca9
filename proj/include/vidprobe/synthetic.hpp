#pragma once

// Deterministic synthetic data: Gaussian embedding clusters and a listing
// with full-scale per-source clip counts.
// Everything here is platform-independent (no std distributions).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "vidprobe/embedding_store.hpp"
#include "vidprobe/ingestion.hpp"
#include "vidprobe/random.hpp"
#include "vidprobe/sources.hpp"

namespace vidprobe::synthetic {

/// Standard normal via Box-Muller.
inline double normal(CounterRng& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::vector<float> gaussian_vector(const std::vector<double>& mean, double sigma, CounterRng& rng) {
  std::vector<float> v(mean.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = static_cast<float>(mean[j] + sigma * normal(rng));
  return v;
}

/// Cluster placement: reals around real_offset * 1, generator k around
/// fake_offset * 1 + source_shift * e_(k mod dim).
struct Layout {
  std::uint32_t dim = 16;
  double real_offset = -3.0;
  double fake_offset = 3.0;
  double source_shift = 0.0;
  double sigma = 1.0;
};

inline std::vector<double> cluster_mean(const Layout& layout, ClassLabel label, std::size_t source_index) {
  std::vector<double> mean(layout.dim, label == ClassLabel::Real ? layout.real_offset : layout.fake_offset);
  if (label == ClassLabel::Fake) mean[source_index % layout.dim] += layout.source_shift;
  return mean;
}

/// `n` records drawn from one cluster; ids are `<prefix>_<i>`.
inline std::vector<EmbeddingRecord> cluster(const Layout& layout, ClassLabel label, const std::string& source,
                                            std::size_t source_index, std::size_t n, std::uint64_t seed,
                                            const std::string& prefix) {
  const auto mean = cluster_mean(layout, label, source_index);
  CounterRng rng(seed, fnv1a64(prefix));
  std::vector<EmbeddingRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({prefix + "_" + std::to_string(i), label, source, gaussian_vector(mean, layout.sigma, rng)});
  }
  return out;
}

/// One embedding per manifest clip. Each clip draws from its own RNG stream
/// keyed by clip id, so the vectors do not depend on manifest order.
inline EmbeddingStore store_for_manifest(const Manifest& m, const Layout& layout, std::uint64_t seed,
                                         const std::string& model_id) {
  EmbeddingStore store(model_id, layout.dim);
  for (const auto& c : m.clips()) {
    const auto& v = m.parent_of(c);
    const auto rank = source_rank(v.source);
    const auto index = rank < kFakeSources.size() ? rank : static_cast<std::size_t>(fnv1a64(v.source) % layout.dim);
    CounterRng rng(seed, fnv1a64(c.clip_id));
    store.add({c.clip_id, v.class_label, v.source, gaussian_vector(cluster_mean(layout, v.class_label, index), layout.sigma, rng)});
  }
  return store;
}

namespace detail {

// Clips per video for the long closed-source uploads.
inline constexpr std::size_t kClipPattern[] = {30, 1, 7, 2, 12, 1, 4, 20, 3, 1, 9, 5, 1, 16, 2};

inline void add_long_videos(std::vector<ListingEntry>& out, const std::string& source, std::size_t clips,
                            const std::vector<double>& fps_choices) {
  std::size_t i = 0;
  while (clips > 0) {
    const std::size_t k = std::min(clips, kClipPattern[i % std::size(kClipPattern)]);
    ListingEntry e;
    e.video_id = source + "_" + std::to_string(i);
    e.source = source;
    e.duration = 2.0 * static_cast<double>(k) + 0.6;  // remainder below one clip is dropped
    e.fps = fps_choices[i % fps_choices.size()];
    out.push_back(std::move(e));
    clips -= k;
    ++i;
  }
}

inline void add_short_videos(std::vector<ListingEntry>& out, const std::string& source, std::size_t n,
                             const std::vector<double>& fps_choices) {
  for (std::size_t i = 0; i < n; ++i) {
    ListingEntry e;
    e.video_id = source + "_" + std::to_string(i);
    e.source = source;
    e.duration = 2.0;
    e.fps = fps_choices[i % fps_choices.size()];
    out.push_back(std::move(e));
  }
}

}  // namespace detail

/// Clip counts per source in the dataset summary table.
struct ClipCountRow {
  const char* source;
  std::size_t clips;
};

inline constexpr ClipCountRow kDatasetClipCounts[] = {
    {"youtube-vos", 4005}, {"modelscope", 1000}, {"text2video", 1000}, {"zeroscope", 1000},
    {"latte", 1000},       {"opensora", 1000},   {"sora", 3988},       {"veo", 238},
    {"dreammachine", 631}, {"videopoet", 272},
};

/// Listing reproducing the per-source clip counts. Real and open-source
/// videos are single 2 s clips; closed-source uploads are longer videos cut
/// into several clips.
inline std::vector<ListingEntry> full_scale_listing() {
  std::vector<ListingEntry> out;
  detail::add_short_videos(out, "youtube-vos", 4005, {24.0, 30.0});
  for (const char* s : {"modelscope", "text2video", "zeroscope", "latte", "opensora"}) {
    detail::add_short_videos(out, s, 1000, {8.0});
  }
  detail::add_long_videos(out, "sora", 3988, {24.0, 25.0, 30.0});
  detail::add_long_videos(out, "veo", 238, {24.0, 30.0});
  detail::add_long_videos(out, "dreammachine", 631, {24.0, 30.0});
  detail::add_long_videos(out, "videopoet", 272, {8.0});
  return out;
}

/// Small listing: `videos_per_source` videos of `clips_per_video` clips for
/// each named source plus the same for the real corpus.
inline std::vector<ListingEntry> small_listing(const std::vector<std::string>& fake_sources,
                                               std::size_t videos_per_source, std::size_t clips_per_video) {
  std::vector<ListingEntry> out;
  auto add = [&](const std::string& source, double fps) {
    for (std::size_t i = 0; i < videos_per_source; ++i) {
      ListingEntry e;
      e.video_id = source + "_" + std::to_string(i);
      e.source = source;
      e.duration = 2.0 * static_cast<double>(clips_per_video);
      e.fps = fps;
      out.push_back(std::move(e));
    }
  };
  add(std::string(kDefaultRealSource), 30.0);
  for (const auto& s : fake_sources) add(s, 8.0);
  return out;
}

}  // namespace vidprobe::synthetic

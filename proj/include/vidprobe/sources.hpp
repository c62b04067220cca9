#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace vidprobe {

struct SourceInfo {
  std::string_view slug;
  std::string_view display;
  bool open_source;
};

// Report column order for the generated sources.
inline constexpr std::array<SourceInfo, 9> kFakeSources{{
    {"latte", "Latte", true},
    {"modelscope", "ModelScope", true},
    {"opensora", "OpenSora", true},
    {"zeroscope", "ZeroScope", true},
    {"text2video", "Text2Video", true},
    {"veo", "Veo", false},
    {"sora", "Sora", false},
    {"dreammachine", "Dream Machine", false},
    {"videopoet", "Video Poet", false},
}};

inline constexpr std::string_view kDefaultRealSource = "youtube-vos";

// Closed-source generators with too few clips to train on.
inline const std::vector<std::string>& default_test_only_sources() {
  static const std::vector<std::string> s{"veo", "dreammachine", "videopoet"};
  return s;
}

inline const std::vector<std::string>& open_source_generators() {
  static const std::vector<std::string> s = [] {
    std::vector<std::string> v;
    for (const auto& info : kFakeSources) {
      if (info.open_source) v.emplace_back(info.slug);
    }
    return v;
  }();
  return s;
}

namespace detail {
inline std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}
}  // namespace detail

/// Maps spellings such as "Dream Machine", "Text2Video-Zero" or "YouTube_VOS"
/// to their slug. Unrecognized names come back lower-cased and otherwise unchanged.
inline std::string canonical_source(std::string_view name) {
  const auto key = detail::squash(name);
  for (const auto& info : kFakeSources) {
    if (key == detail::squash(info.slug)) return std::string(info.slug);
  }
  if (key == "text2videozero") return "text2video";
  if (key == "youtubevos") return std::string(kDefaultRealSource);
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower;
}

inline bool is_known_fake_source(std::string_view slug) {
  return std::any_of(kFakeSources.begin(), kFakeSources.end(), [&](const auto& i) { return i.slug == slug; });
}

inline std::string display_name(std::string_view slug) {
  for (const auto& info : kFakeSources) {
    if (info.slug == slug) return std::string(info.display);
  }
  if (slug == kDefaultRealSource) return "YouTube-VOS";
  return std::string(slug);
}

/// Position in the report column order; unknown sources sort after all known ones.
inline std::size_t source_rank(std::string_view slug) {
  for (std::size_t i = 0; i < kFakeSources.size(); ++i) {
    if (kFakeSources[i].slug == slug) return i;
  }
  return kFakeSources.size();
}

/// Known sources in column order, then everything else alphabetically.
inline void sort_sources(std::vector<std::string>& slugs) {
  std::sort(slugs.begin(), slugs.end(), [](const std::string& a, const std::string& b) {
    const auto ra = source_rank(a), rb = source_rank(b);
    return ra != rb ? ra < rb : a < b;
  });
  slugs.erase(std::unique(slugs.begin(), slugs.end()), slugs.end());
}

}  // namespace vidprobe

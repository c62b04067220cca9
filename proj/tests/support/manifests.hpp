#pragma once

#include <random>
#include <string>
#include <vector>

#include "vidprobe/ingestion.hpp"

namespace test {

/// Random listing over the real corpus and five generators. About a third of
/// the videos share one of six origins, also across sources.
inline vidprobe::Manifest random_manifest(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nvid(2, 12), nclip(1, 6), norigin(0, 5);
  std::vector<vidprobe::ListingEntry> listing;
  int vid = 0;
  for (const auto& src : std::vector<std::string>{"youtube-vos", "latte", "modelscope", "opensora", "sora", "veo"}) {
    const int n = nvid(rng);
    for (int i = 0; i < n; ++i) {
      vidprobe::ListingEntry e;
      e.video_id = src + "_v" + std::to_string(vid++);
      e.source = src;
      e.duration = 2.0 * nclip(rng);
      e.fps = 8;
      if (rng() % 3 == 0) e.origin_video_id = "shared_" + std::to_string(norigin(rng));
      listing.push_back(std::move(e));
    }
  }
  return vidprobe::build_manifest(listing, {});
}

}  // namespace test

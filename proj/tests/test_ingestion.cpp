#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "support/temp_dir.hpp"
#include "vidprobe/ingestion.hpp"
#include "vidprobe/synthetic.hpp"

using namespace vidprobe;

namespace {

ListingEntry video(std::string id, std::string source, double duration, double fps = 8.0) {
  ListingEntry e;
  e.video_id = std::move(id);
  e.source = std::move(source);
  e.duration = duration;
  e.fps = fps;
  return e;
}

const SourceStats& row(const ManifestStats& s, const std::string& source) {
  auto it = std::find_if(s.per_source.begin(), s.per_source.end(), [&](const auto& r) { return r.source == source; });
  if (it == s.per_source.end()) throw std::runtime_error("no row " + source);
  return *it;
}

}  // namespace

TEST(ClipBoundaries, Examples) {
  EXPECT_EQ(compute_clip_boundaries(2.0, 2.0), (std::vector<ClipInterval>{{0.0, 2.0}}));
  EXPECT_EQ(compute_clip_boundaries(5.0, 2.0), (std::vector<ClipInterval>{{0.0, 2.0}, {2.0, 4.0}}));
  EXPECT_TRUE(compute_clip_boundaries(1.5, 2.0).empty());
  EXPECT_EQ(compute_clip_boundaries(0.6, 0.2).size(), 3u);
}

TEST(ClipBoundaries, RejectsNonPositive) {
  EXPECT_THROW(compute_clip_boundaries(0.0, 2.0), Error);
  EXPECT_THROW(compute_clip_boundaries(-1.0, 2.0), Error);
  EXPECT_THROW(compute_clip_boundaries(3.0, 0.0), Error);
  EXPECT_THROW(compute_clip_boundaries(3.0, -2.0), Error);
}

TEST(ClipBoundaries, CountIsFloorAndIntervalsAreDisjoint) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dur(0.01, 200.0);
  std::uniform_real_distribution<double> len(0.1, 10.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double d = dur(rng), L = len(rng);
    const auto clips = compute_clip_boundaries(d, L);
    // Oracle: count whole windows by stepping.
    std::size_t expected = 0;
    while (static_cast<double>(expected + 1) * L <= d) ++expected;
    ASSERT_EQ(clips.size(), expected) << d << " / " << L;
    double covered = 0.0;
    for (std::size_t k = 0; k < clips.size(); ++k) {
      EXPECT_NEAR(clips[k].end - clips[k].start, L, 1e-12 * clips[k].end);
      if (k > 0) {
        EXPECT_LE(clips[k - 1].end, clips[k].start);
      }
      EXPECT_LE(clips[k].end, d);
      covered += clips[k].end - clips[k].start;
    }
    EXPECT_LE(covered, d + 1e-9);
  }
}

TEST(BuildManifest, EmptyListing) {
  const auto m = build_manifest({});
  EXPECT_TRUE(m.videos().empty());
  EXPECT_TRUE(m.clips().empty());
  const auto s = manifest_stats(m);
  EXPECT_EQ(s.total_clips, 0u);
  EXPECT_EQ(s.total_minutes, 0.0);
  EXPECT_TRUE(s.per_source.empty());
}

TEST(BuildManifest, SixtySecondVideoYieldsThirtyClips) {
  const auto m = build_manifest({video("sora_a", "Sora", 60.0, 30.0)});
  ASSERT_EQ(m.clips().size(), 30u);
  EXPECT_EQ(m.clips().front().clip_id, "sora_a_0000");
  EXPECT_EQ(m.clips().back().start, 58.0);
  EXPECT_EQ(m.clips().back().end, 60.0);
  EXPECT_EQ(m.videos().front().origin_video_id, "sora_a");
  EXPECT_EQ(m.videos().front().class_label, ClassLabel::Fake);
}

TEST(BuildManifest, LabelsFollowRealCorpusSet) {
  auto m = build_manifest({video("r", "YouTube-VOS", 2.0, 30.0), video("f", "Dream Machine", 4.0, 24.0)});
  EXPECT_EQ(m.video("r").class_label, ClassLabel::Real);
  EXPECT_EQ(m.video("r").source, "youtube-vos");
  EXPECT_EQ(m.video("f").class_label, ClassLabel::Fake);
  EXPECT_EQ(m.video("f").source, "dreammachine");

  IngestConfig cfg;
  cfg.real_sources = {"kinetics"};
  cfg.allow_unknown_source = true;
  m = build_manifest({video("k", "kinetics", 2.0), video("y", "youtube-vos", 2.0)}, cfg);
  EXPECT_EQ(m.video("k").class_label, ClassLabel::Real);
  EXPECT_EQ(m.video("y").class_label, ClassLabel::Fake);
}

TEST(BuildManifest, UnknownSourceNeedsOptIn) {
  try {
    build_manifest({video("x", "mystery-gen", 2.0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownSource);
  }
  IngestConfig cfg;
  cfg.allow_unknown_source = true;
  const auto m = build_manifest({video("x", "mystery-gen", 2.0)}, cfg);
  EXPECT_EQ(m.video("x").class_label, ClassLabel::Fake);
}

TEST(BuildManifest, ExplicitLabelMustAgree) {
  auto e = video("x", "sora", 2.0);
  e.class_label = "real";
  EXPECT_THROW(build_manifest({e}), Error);
  e.class_label = "fake";
  EXPECT_NO_THROW(build_manifest({e}));
}

TEST(BuildManifest, RejectsBadEntries) {
  EXPECT_THROW(build_manifest({video("x", "sora", 0.0)}), Error);
  EXPECT_THROW(build_manifest({video("x", "sora", 2.0, 0.0)}), Error);
  EXPECT_THROW(build_manifest({video("x", "sora", 2.0), video("x", "sora", 2.0)}), Error);
}

TEST(Listing, ParsesJsonLines) {
  std::istringstream in(
      R"({"video_id":"a","source":"latte","duration":2.0,"fps":8}
)"
      "\n"
      R"({"video_id":"b","source":"sora","duration":7.5,"fps":30,"origin_video_id":"sora-upload-1","metadata":"beach"})");
  const auto listing = parse_listing(in);
  ASSERT_EQ(listing.size(), 2u);
  EXPECT_EQ(listing[1].origin_video_id.value(), "sora-upload-1");
  const auto m = build_manifest(listing);
  EXPECT_EQ(m.clips().size(), 4u);
  EXPECT_EQ(m.video("b").metadata.value(), "beach");
}

TEST(Listing, ReportsLineOfBadEntry) {
  std::istringstream in("{\"video_id\":\"a\",\"source\":\"latte\",\"duration\":2,\"fps\":8}\n{\"video_id\":\"b\"}\n");
  try {
    parse_listing(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ManifestFile, RoundTripPreservesEverything) {
  const auto m = build_manifest(synthetic::small_listing({"latte", "sora"}, 3, 4));
  std::stringstream ss;
  write_manifest(m, ss);
  const auto text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), R"({"format_version":1,"clip_length":2.0})");
  const auto back = parse_manifest(ss);
  ASSERT_EQ(back.clips().size(), m.clips().size());
  for (std::size_t i = 0; i < m.clips().size(); ++i) {
    EXPECT_EQ(back.clips()[i].clip_id, m.clips()[i].clip_id);
    EXPECT_EQ(back.clips()[i].start, m.clips()[i].start);
    EXPECT_EQ(back.parent_of(back.clips()[i]).source, m.parent_of(m.clips()[i]).source);
  }
  std::stringstream again;
  write_manifest(back, again);
  EXPECT_EQ(again.str(), text);
}

TEST(ManifestFile, RejectsOverlapsAndBadHeaders) {
  std::istringstream no_header("");
  EXPECT_THROW(parse_manifest(no_header), Error);
  std::istringstream bad_version(R"({"format_version":9,"clip_length":2.0})");
  EXPECT_THROW(parse_manifest(bad_version), Error);
  std::istringstream overlap(
      R"({"format_version":1,"clip_length":2.0}
{"clip_id":"a_0","parent":"a","origin_video_id":"a","source":"sora","class_label":"fake","start":0,"end":2,"fps":30,"duration":4}
{"clip_id":"a_1","parent":"a","origin_video_id":"a","source":"sora","class_label":"fake","start":1,"end":3,"fps":30,"duration":4})");
  EXPECT_THROW(parse_manifest(overlap), Error);
  std::istringstream outside(
      R"({"format_version":1,"clip_length":2.0}
{"clip_id":"a_0","parent":"a","origin_video_id":"a","source":"sora","class_label":"fake","start":2,"end":4,"fps":30,"duration":3})");
  EXPECT_THROW(parse_manifest(outside), Error);
}

TEST(ManifestStats, SingleClip) {
  const auto s = manifest_stats(build_manifest({video("v", "latte", 2.0)}));
  EXPECT_EQ(s.total_clips, 1u);
  EXPECT_NEAR(s.total_minutes, 2.0 / 60.0, 1e-12);
  EXPECT_NEAR(s.total_minutes, 0.033, 5e-4);
}

TEST(ManifestStats, InvariantUnderReordering) {
  auto listing = synthetic::small_listing({"latte", "veo", "sora"}, 5, 3);
  listing.push_back(video("long", "sora", 13.0, 30.0));
  const auto a = manifest_stats(build_manifest(listing));
  std::mt19937_64 rng(1);
  std::shuffle(listing.begin(), listing.end(), rng);
  const auto b = manifest_stats(build_manifest(listing));
  ASSERT_EQ(a.per_source.size(), b.per_source.size());
  for (std::size_t i = 0; i < a.per_source.size(); ++i) {
    EXPECT_EQ(a.per_source[i].source, b.per_source[i].source);
    EXPECT_EQ(a.per_source[i].clips, b.per_source[i].clips);
    EXPECT_DOUBLE_EQ(a.per_source[i].minutes, b.per_source[i].minutes);
  }
  EXPECT_EQ(a.total_clips, b.total_clips);
}

TEST(ManifestStats, FullScalePerSourceCounts) {
  const auto m = build_manifest(synthetic::full_scale_listing());
  const auto s = manifest_stats(m);
  // Per-source clip counts of the dataset summary table.
  EXPECT_EQ(row(s, "youtube-vos").clips, 4005u);
  EXPECT_EQ(row(s, "modelscope").clips, 1000u);
  EXPECT_EQ(row(s, "text2video").clips, 1000u);
  EXPECT_EQ(row(s, "zeroscope").clips, 1000u);
  EXPECT_EQ(row(s, "latte").clips, 1000u);
  EXPECT_EQ(row(s, "opensora").clips, 1000u);
  EXPECT_EQ(row(s, "sora").clips, 3988u);
  EXPECT_EQ(row(s, "veo").clips, 238u);
  EXPECT_EQ(row(s, "dreammachine").clips, 631u);
  EXPECT_EQ(row(s, "videopoet").clips, 272u);
  // Per-source minutes match the table's duration column to rounding.
  EXPECT_NEAR(row(s, "youtube-vos").minutes, 133.5, 0.05);
  EXPECT_NEAR(row(s, "latte").minutes, 33.3, 0.05);
  EXPECT_NEAR(row(s, "sora").minutes, 132.9, 0.05);
  EXPECT_NEAR(row(s, "veo").minutes, 7.9, 0.05);
  EXPECT_NEAR(row(s, "dreammachine").minutes, 21.0, 0.05);
  // Totals are the arithmetic sums of those rows: 14134 two-second clips.
  EXPECT_EQ(s.total_clips, 14134u);
  EXPECT_NEAR(s.total_minutes, 14134 * 2.0 / 60.0, 1e-9);
  EXPECT_EQ(s.per_source.front().source, "youtube-vos");
}

TEST(ManifestFile, WritesAtomicallyToDisk) {
  test::TempDir dir;
  const auto m = build_manifest(synthetic::small_listing({"latte"}, 2, 2));
  write_manifest(m, dir.path() / "m.jsonl");
  EXPECT_EQ(read_manifest(dir.path() / "m.jsonl").clips().size(), 8u);
}

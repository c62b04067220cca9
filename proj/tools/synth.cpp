// vidprobe-synth: writes deterministic synthetic listings and embedding
// stores, used to build the bundled test fixture.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vidprobe/synthetic.hpp"

using namespace vidprobe;

int main(int argc, char** argv) {
  CLI::App app{"vidprobe-synth: synthetic listings and embedding stores"};
  app.require_subcommand(1);

  auto* listing = app.add_subcommand("listing", "Write a video listing (JSONL)");
  std::string listing_out, sources = "latte,modelscope,opensora,zeroscope,text2video";
  std::size_t videos = 20, clips = 3;
  bool full_scale = false;
  listing->add_option("--out", listing_out)->required();
  listing->add_option("--sources", sources, "Comma-separated generator sources");
  listing->add_option("--videos", videos, "Videos per source");
  listing->add_option("--clips", clips, "Clips per video");
  listing->add_flag("--full-scale", full_scale, "Reproduce the dataset summary clip counts");

  auto* store = app.add_subcommand("store", "Write one Gaussian embedding per manifest clip");
  std::string manifest_path, store_out, model_id = "synthetic";
  std::uint64_t seed = 7;
  synthetic::Layout layout;
  store->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  store->add_option("--out", store_out)->required();
  store->add_option("--model-id", model_id);
  store->add_option("--seed", seed);
  store->add_option("--dim", layout.dim);
  store->add_option("--real-offset", layout.real_offset);
  store->add_option("--fake-offset", layout.fake_offset);
  store->add_option("--source-shift", layout.source_shift);
  store->add_option("--sigma", layout.sigma);

  CLI11_PARSE(app, argc, argv);

  try {
    if (listing->parsed()) {
      std::vector<ListingEntry> entries;
      if (full_scale) {
        entries = synthetic::full_scale_listing();
      } else {
        std::vector<std::string> names;
        std::stringstream ss(sources);
        for (std::string s; std::getline(ss, s, ',');) {
          if (!s.empty()) names.push_back(s);
        }
        entries = synthetic::small_listing(names, videos, clips);
      }
      std::ofstream out(listing_out);
      write_listing(entries, out);
      if (!out) throw Error(ErrorCode::Io, "cannot write " + listing_out);
    } else {
      const auto m = read_manifest(manifest_path);
      write_store(synthetic::store_for_manifest(m, layout, seed, model_id), store_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

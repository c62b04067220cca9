#include <gtest/gtest.h>

#include "support/temp_dir.hpp"
#include "vidprobe/provenance.hpp"
#include "vidprobe/run_config.hpp"

using namespace vidprobe;

TEST(RunConfig, EmptyConfigLeavesFlags) {
  RunConfig flags;
  flags.seed = 3;
  flags.epochs = 10;
  EXPECT_EQ(merge(parse_config("{}"), flags), flags);
}

TEST(RunConfig, FlagsOverrideFile) {
  const auto file = parse_config(R"({"epochs": 100, "lr": 0.001, "train-sources": ["latte", "sora"]})");
  RunConfig flags;
  flags.epochs = 5;
  const auto merged = merge(file, flags);
  EXPECT_EQ(merged.epochs, 5u);
  EXPECT_EQ(merged.lr, 0.001);
  EXPECT_EQ(merged.train_sources, (std::vector<std::string>{"latte", "sora"}));
}

TEST(RunConfig, CsvSourceListAccepted) {
  EXPECT_EQ(parse_config(R"({"train-sources": "latte,sora"})").train_sources,
            (std::vector<std::string>{"latte", "sora"}));
}

TEST(RunConfig, EchoRoundTrips) {
  RunConfig c;
  c.manifest = "m.jsonl";
  c.store = std::vector<std::string>{"a.vaeb", "b.vaeb"};
  c.protocol = "one-to-many";
  c.train_source = "latte";
  c.seed = 18446744073709551615ull;
  c.train_fraction = 0.25;
  c.fill_diagonal = true;
  c.epochs = 7;
  c.lr = 1e-4;
  c.threads = 4;
  EXPECT_EQ(parse_config(to_json(c).dump(2)), c);
}

TEST(RunConfig, MalformedAndUnknown) {
  try {
    parse_config("{\n  \"epochs\": 5,\n  oops\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    parse_config(R"({"epoch": 5})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
  EXPECT_THROW(parse_config(R"({"epochs": -1})"), Error);
  EXPECT_THROW(parse_config(R"({"fill-diagonal": "yes"})"), Error);
  EXPECT_THROW(parse_config("[1, 2]"), Error);
}

TEST(RunConfig, LoadFromFile) {
  test::TempDir dir;
  const auto p = dir.path() / "c.json";
  binary::write_file_atomic(p, R"({"seed": 9})");
  EXPECT_EQ(load_config(p).seed, 9u);
  EXPECT_THROW(load_config(dir.path() / "missing.json"), Error);
}

TEST(Provenance, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Provenance, WritesEchoAndDigests) {
  test::TempDir dir;
  const auto input = dir.path() / "in.txt";
  binary::write_file_atomic(input, "abc");
  RunConfig c;
  c.seed = 1;
  const auto out = dir.path() / "report.csv";
  write_provenance(out, c, "eval", {input});
  EXPECT_EQ(load_config(dir.path() / "report.csv.config.json"), c);
  const auto prov = nlohmann::json::parse(binary::read_file(dir.path() / "report.csv.provenance.json"));
  EXPECT_EQ(prov["command"], "eval");
  EXPECT_EQ(prov["inputs"][0]["sha256"], sha256_hex("abc"));
}

// vidprobe: command-line front end for manifests, embedding stores, probe
// training and the cross-generator evaluation protocols.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vidprobe/provenance.hpp"
#include "vidprobe/vidprobe.hpp"

namespace fs = std::filesystem;
using namespace vidprobe;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  unsigned threads = 0;
  bool quiet = false;
};

// Flags shared by the config-driven commands. Values only land in RunConfig
// when the flag was actually given, so they override the config file.
struct Flags {
  std::string config_path;
  RunConfig cli;

  std::string manifest, refs, tests, report, out, protocol, method, train_source, train_sources, format;
  std::vector<std::string> store;
  std::uint64_t seed = 0;
  double train_fraction = 0.5, lr = 1e-4;
  std::uint32_t epochs = 100, batch = 32;
  bool fill_diagonal = false, diagnostic_leak = false, per_source = false, no_shuffle = false, l2 = false,
       strict = false;

  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, const std::vector<std::string>& names) {
    app->add_option("--config", config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    for (const auto& n : names) {
      CLI::Option* o = nullptr;
      if (n == "manifest") o = app->add_option("--manifest", manifest, "Manifest (JSONL)");
      else if (n == "store") o = app->add_option("--store", store, "Embedding store (.vaeb); repeat for several encoders");
      else if (n == "refs") o = app->add_option("--refs", refs, "Reference store (.vaeb)");
      else if (n == "tests") o = app->add_option("--tests", tests, "Test store (.vaeb)");
      else if (n == "report") o = app->add_option("--report", report, "Report output path");
      else if (n == "out") o = app->add_option("--out", out, "Output path");
      else if (n == "protocol") o = app->add_option("--protocol", protocol, "one-to-many | many-to-many");
      else if (n == "method") o = app->add_option("--method", method, "distance | probe");
      else if (n == "train-source") o = app->add_option("--train-source", train_source, "Training generator (one-to-many)");
      else if (n == "train-sources") o = app->add_option("--train-sources", train_sources, "Comma-separated training generators (many-to-many)");
      else if (n == "seed") o = app->add_option("--seed", seed, "Seed for splits and shuffling");
      else if (n == "train-fraction") o = app->add_option("--train-fraction", train_fraction, "Per-source training fraction");
      else if (n == "fill-diagonal") o = app->add_flag("--fill-diagonal", fill_diagonal, "One-to-many: also score the training source on held-out clips");
      else if (n == "diagnostic-leak") o = app->add_flag("--diagnostic-leak", diagnostic_leak, "Many-to-many: test on the training clips");
      else if (n == "per-source") o = app->add_flag("--per-source", per_source, "One report column per generator");
      else if (n == "epochs") o = app->add_option("--epochs", epochs, "Training epochs");
      else if (n == "batch") o = app->add_option("--batch", batch, "Batch size");
      else if (n == "lr") o = app->add_option("--lr", lr, "Adam learning rate");
      else if (n == "no-shuffle") o = app->add_flag("--no-shuffle", no_shuffle, "Keep sample order fixed across epochs");
      else if (n == "l2-normalize") o = app->add_flag("--l2-normalize", l2, "L2-normalize features first");
      else if (n == "strict") o = app->add_flag("--strict", strict, "Reject reference sets missing a class");
      else if (n == "format") o = app->add_option("--format", format, "table | csv | jsonl");
      opts[n] = o;
    }
  }

  bool given(const std::string& n) const {
    auto it = opts.find(n);
    return it != opts.end() && it->second->count() > 0;
  }

  /// Config file values, overridden by any flag given on the command line.
  RunConfig resolve(const Globals& g) {
    RunConfig f;
    if (given("manifest")) f.manifest = manifest;
    if (given("store")) f.store = store;
    if (given("refs")) f.refs = refs;
    if (given("tests")) f.tests = tests;
    if (given("report")) f.report = report;
    if (given("out")) f.out = out;
    if (given("protocol")) f.protocol = protocol;
    if (given("method")) f.method = method;
    if (given("train-source")) f.train_source = train_source;
    if (given("train-sources")) {
      std::vector<std::string> parts;
      std::stringstream ss(train_sources);
      for (std::string p; std::getline(ss, p, ',');) {
        if (!p.empty()) parts.push_back(p);
      }
      f.train_sources = parts;
    }
    if (given("seed")) f.seed = seed;
    if (given("train-fraction")) f.train_fraction = train_fraction;
    if (given("fill-diagonal")) f.fill_diagonal = fill_diagonal;
    if (given("diagnostic-leak")) f.diagnostic_leak = diagnostic_leak;
    if (given("per-source")) f.per_source = per_source;
    if (given("epochs")) f.epochs = epochs;
    if (given("batch")) f.batch = batch;
    if (given("lr")) f.lr = lr;
    if (given("no-shuffle")) f.no_shuffle = no_shuffle;
    if (given("l2-normalize")) f.l2_normalize = l2;
    if (given("strict")) f.strict = strict;
    if (given("format")) f.format = format;
    if (g.threads > 0) f.threads = g.threads;
    RunConfig base = config_path.empty() ? RunConfig{} : load_config(config_path);
    return merge(base, f);
  }
};

template <typename T>
const T& require(const std::optional<T>& v, const char* flag) {
  if (!v) throw UsageError(std::string("missing required option --") + flag);
  return *v;
}

void require_file(const std::string& p) {
  if (!fs::exists(p)) throw Error(ErrorCode::Io, "no such file: " + p);
}

ReportFormat resolve_format(const RunConfig& c) {
  if (c.format) return parse_report_format(*c.format);
  if (c.report) {
    const auto ext = fs::path(*c.report).extension().string();
    if (ext == ".jsonl") return ReportFormat::Jsonl;
    if (ext == ".txt") return ReportFormat::Table;
  }
  return ReportFormat::Csv;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.epochs = c.epochs.value_or(t.epochs);
  t.batch_size = c.batch.value_or(t.batch_size);
  t.adam.lr = c.lr.value_or(t.adam.lr);
  t.seed = c.seed.value_or(0);
  t.shuffle = !c.no_shuffle.value_or(false);
  return t;
}

void log(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void write_text(const std::string& path, const std::string& text) { binary::write_file_atomic(path, text); }

// --- subcommands -----------------------------------------------------------

int cmd_ingest(const Globals& g, const std::string& listing, const std::string& out, double clip_length,
               bool allow_unknown, const std::string& real_sources) {
  IngestConfig cfg;
  cfg.clip_length = clip_length;
  cfg.allow_unknown_source = allow_unknown;
  if (!real_sources.empty()) {
    cfg.real_sources.clear();
    std::stringstream ss(real_sources);
    for (std::string p; std::getline(ss, p, ',');) {
      if (!p.empty()) cfg.real_sources.push_back(p);
    }
  }
  const auto m = build_manifest(read_listing(listing), cfg);
  write_manifest(m, fs::path(out));
  log(g, "wrote " + std::to_string(m.clips().size()) + " clips from " + std::to_string(m.videos().size()) +
             " videos to " + out);
  return 0;
}

int cmd_stats(const std::string& manifest_path, const std::string& format) {
  const auto stats = manifest_stats(read_manifest(manifest_path));
  char buf[160];
  if (format == "csv") {
    std::cout << "source,type,videos,clips,minutes\n";
    for (const auto& s : stats.per_source) {
      std::snprintf(buf, sizeof buf, "%s,%s,%zu,%zu,%.1f\n", s.source.c_str(), std::string(label_name(s.class_label)).c_str(),
                    s.videos, s.clips, s.minutes);
      std::cout << buf;
    }
    std::snprintf(buf, sizeof buf, "total,-,-,%zu,%.1f\n", stats.total_clips, stats.total_minutes);
    std::cout << buf;
    return 0;
  }
  std::snprintf(buf, sizeof buf, "%-16s %-5s %8s %8s %10s\n", "Source", "Type", "Videos", "Clips", "Minutes");
  std::cout << buf;
  for (const auto& s : stats.per_source) {
    std::snprintf(buf, sizeof buf, "%-16s %-5s %8zu %8zu %10.1f\n", display_name(s.source).c_str(),
                  std::string(label_name(s.class_label)).c_str(), s.videos, s.clips, s.minutes);
    std::cout << buf;
  }
  std::snprintf(buf, sizeof buf, "%-16s %-5s %8s %8zu %10.1f\n", "Total", "-", "-", stats.total_clips, stats.total_minutes);
  std::cout << buf;
  return 0;
}

int cmd_train(const Globals& g, Flags& f, const std::string& loss_log) {
  const auto c = f.resolve(g);
  const auto& stores = require(c.store, "store");
  const auto& out = require(c.out, "out");
  require(c.seed, "seed");
  if (stores.size() != 1) throw UsageError("train takes exactly one --store");
  require_file(stores[0]);

  const auto store = read_store(stores[0]);
  auto records = store.records();
  if (c.l2_normalize.value_or(false)) {
    for (auto& r : records) l2_normalize(r.vector);
  }
  const auto tc = train_config(c);
  const auto result = train(make_dataset(records), tc, store.model_id());
  save_probe(make_probe_file(result.probe, tc), out);
  write_provenance(out, c, "train", {stores[0]});
  if (!loss_log.empty()) {
    std::string text;
    char buf[64];
    for (double l : result.loss_history) {
      std::snprintf(buf, sizeof buf, "%.17g\n", l);
      text += buf;
    }
    write_text(loss_log, text);
  }
  log(g, "trained on " + std::to_string(records.size()) + " records, final loss " +
             std::to_string(result.loss_history.empty() ? 0.0 : result.loss_history.back()) + ", wrote " + out);
  return 0;
}

void emit_report(const Globals& g, const RunConfig& c, const EvalReport& report, std::string_view command,
                 const std::vector<fs::path>& inputs) {
  warn(report.warnings);
  const auto text = render_report(report, resolve_format(c));
  if (c.report) {
    write_text(*c.report, text);
    write_provenance(*c.report, c, command, inputs);
    log(g, "wrote report " + *c.report);
  } else {
    std::cout << text;
  }
}

ProtocolConfig protocol_config(const RunConfig& c, const Globals& g) {
  ProtocolConfig p;
  p.method = parse_method(c.method.value_or("distance"));
  p.seed = c.seed.value_or(0);
  p.train_fraction = c.train_fraction.value_or(0.5);
  p.train = train_config(c);
  p.l2_normalize = c.l2_normalize.value_or(false);
  p.strict = c.strict.value_or(false);
  p.fill_diagonal = c.fill_diagonal.value_or(false);
  p.diagnostic_leak = c.diagnostic_leak.value_or(false);
  p.threads = c.threads.value_or(g.threads > 0 ? g.threads : default_threads());
  return p;
}

int cmd_eval_distance(const Globals& g, Flags& f) {
  auto c = f.resolve(g);
  const auto& refs = require(c.refs, "refs");
  const auto& tests = require(c.tests, "tests");
  require_file(refs);
  require_file(tests);
  c.method = "distance";
  const auto report = evaluate_stores(read_store(refs), read_store(tests), c.per_source.value_or(false),
                                      protocol_config(c, g));
  emit_report(g, c, report, "eval-distance", {refs, tests});
  return 0;
}

int cmd_eval(const Globals& g, Flags& f) {
  const auto c = f.resolve(g);
  const auto protocol = parse_protocol(require(c.protocol, "protocol"));
  const auto& manifest_path = require(c.manifest, "manifest");
  const auto& store_paths = require(c.store, "store");
  require(c.seed, "seed");
  require_file(manifest_path);
  std::vector<fs::path> inputs{manifest_path};
  std::vector<EmbeddingStore> stores;
  for (const auto& s : store_paths) {
    require_file(s);
    inputs.emplace_back(s);
    stores.push_back(read_store(s));
  }
  const auto manifest = read_manifest(manifest_path);
  const auto pc = protocol_config(c, g);
  EvalReport report;
  if (protocol == Protocol::OneToMany) {
    report = run_one_to_many(stores, manifest, require(c.train_source, "train-source"), pc);
  } else {
    std::vector<std::string> train = c.train_sources.value_or(std::vector<std::string>{});
    if (train.empty()) train = open_source_generators();
    report = run_many_to_many(stores, manifest, train, pc);
  }
  emit_report(g, c, report, "eval", inputs);
  return 0;
}

int cmd_report(const std::string& in, const std::string& format, const std::string& out) {
  std::ifstream is(in);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + in);
  const auto text = render_report(parse_report_jsonl(is), parse_report_format(format));
  if (out.empty()) std::cout << text;
  else write_text(out, text);
  return 0;
}

int cmd_verify_store(const std::string& path) {
  const auto store = read_store(path);
  std::map<std::string, std::size_t> per_source;
  std::size_t n_real = 0;
  for (const auto& r : store.records()) {
    ++per_source[r.source];
    if (r.class_label == ClassLabel::Real) ++n_real;
  }
  std::cout << "model_id: " << store.model_id() << "\n"
            << "dim: " << store.dim() << "\n"
            << "records: " << store.size() << "\n"
            << "real: " << n_real << "\n"
            << "fake: " << store.size() - n_real << "\n";
  for (const auto& [s, n] : per_source) std::cout << "source " << s << ": " << n << "\n";
  if (!store.empty() && (n_real == 0 || n_real == store.size())) {
    std::cerr << "warning: store contains a single class\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vidprobe: AI-generated video detection from frozen encoder embeddings"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "Cap on worker threads (default: all cores)");
  app.add_flag("--quiet", g.quiet, "Suppress progress messages");
  app.fallthrough();

  std::function<int()> run;

  auto* ingest = app.add_subcommand("ingest", "Build a clip manifest from a video listing");
  std::string listing, ingest_out, real_sources;
  double clip_length = kDefaultClipLength;
  bool allow_unknown = false;
  ingest->add_option("--listing", listing, "Video listing (JSONL)")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "Manifest output (JSONL)")->required();
  ingest->add_option("--clip-length", clip_length, "Clip length in seconds");
  ingest->add_flag("--allow-unknown-source", allow_unknown, "Accept sources outside the known generator list");
  ingest->add_option("--real-sources", real_sources, "Comma-separated real corpora (default youtube-vos)");
  ingest->callback([&] { run = [&] { return cmd_ingest(g, listing, ingest_out, clip_length, allow_unknown, real_sources); }; });

  auto* stats = app.add_subcommand("stats", "Per-source clip counts and durations of a manifest");
  std::string stats_manifest, stats_format = "table";
  stats->add_option("--manifest", stats_manifest, "Manifest (JSONL)")->required()->check(CLI::ExistingFile);
  stats->add_option("--format", stats_format, "table | csv");
  stats->callback([&] { run = [&] { return cmd_stats(stats_manifest, stats_format); }; });

  auto* train_cmd = app.add_subcommand("train", "Train a linear probe on an embedding store");
  Flags train_flags;
  std::string loss_log;
  train_flags.add(train_cmd, {"store", "out", "seed", "epochs", "batch", "lr", "no-shuffle", "l2-normalize"});
  train_cmd->add_option("--loss-log", loss_log, "Write the per-step loss history here");
  train_cmd->callback([&] { run = [&] { return cmd_train(g, train_flags, loss_log); }; });

  auto* evald = app.add_subcommand("eval-distance", "Nearest-reference classification of one store against another");
  Flags evald_flags;
  evald_flags.add(evald, {"refs", "tests", "per-source", "report", "format", "strict", "l2-normalize"});
  evald->callback([&] { run = [&] { return cmd_eval_distance(g, evald_flags); }; });

  auto* eval = app.add_subcommand("eval", "Run the one-to-many or many-to-many protocol");
  Flags eval_flags;
  eval_flags.add(eval, {"protocol", "method", "train-source", "train-sources", "store", "manifest", "seed", "report",
                        "format", "train-fraction", "fill-diagonal", "diagnostic-leak", "epochs", "batch", "lr",
                        "no-shuffle", "l2-normalize", "strict"});
  eval->callback([&] { run = [&] { return cmd_eval(g, eval_flags); }; });

  auto* report = app.add_subcommand("report", "Re-render a JSONL report");
  std::string report_in, report_format = "table", report_out;
  report->add_option("--in", report_in, "Report (JSONL)")->required()->check(CLI::ExistingFile);
  report->add_option("--format", report_format, "table | csv | jsonl");
  report->add_option("--out", report_out, "Output path (default stdout)");
  report->callback([&] { run = [&] { return cmd_report(report_in, report_format, report_out); }; });

  auto* verify = app.add_subcommand("verify-store", "Validate an embedding store and print its header");
  std::string verify_path;
  verify->add_option("store", verify_path, "Embedding store (.vaeb)")->required();
  verify->callback([&] { run = [&] { return cmd_verify_store(verify_path); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    return run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}

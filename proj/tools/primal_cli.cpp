// Command-line front door for the primal shared library. Every piece of
// functionality goes through the C API in primal/primal.h; this file only
// parses flags, shuttles files, and reports errors.

#include <primal/primal.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitMissingInput = 2;

struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
  throw CliError{code, message};
}

void check(primal_status status) {
  if (status == PRIMAL_OK) return;
  int code = status == PRIMAL_ERR_IO ? kExitMissingInput : kExitValidation;
  fail(code, primal_last_error());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kExitMissingInput, "cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(kExitMissingInput, "cannot write: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Owned string coming back from the C API.
struct ApiString {
  char* ptr = nullptr;
  ~ApiString() { primal_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

struct CorpusHandle {
  primal_corpus* ptr = nullptr;
  ~CorpusHandle() { primal_corpus_free(ptr); }
};

struct ModelHandle {
  primal_model* ptr = nullptr;
  ~ModelHandle() { primal_model_free(ptr); }
};

// Options shared by the subcommands.
struct CommonOpts {
  std::string corpus;
  std::string train_file, validation_file, test_file;
  std::string split = "test";
  std::string model;
  std::string config_file;
  std::string out;
  std::string profile;
  std::optional<uint64_t> seed;
};

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Merges --config file contents with flag overrides into the JSON object
// handed to the library. Flags win.
json effective_config(const CommonOpts& opts) {
  json cfg = json::object();
  if (!opts.config_file.empty()) {
    try {
      cfg = json::parse(read_file(opts.config_file));
    } catch (const json::exception& ex) {
      fail(kExitValidation, std::string("config file: ") + ex.what());
    }
    if (!cfg.is_object()) fail(kExitValidation, "config file must hold a JSON object");
  }
  if (!opts.profile.empty()) cfg["profile"] = opts.profile;
  if (opts.seed.has_value()) cfg["seed"] = *opts.seed;
  return cfg;
}

uint64_t effective_seed(const CommonOpts& opts, const json& cfg) {
  if (opts.seed.has_value()) return *opts.seed;
  if (cfg.contains("seed")) return cfg.at("seed").get<uint64_t>();
  return 42;
}

void write_run_meta(const std::string& out_path, uint64_t seed, const json& cfg) {
  json meta;
  meta["seed"] = seed;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.dump())));
  meta["config_hash"] = hash;
  meta["version"] = primal_version();
  write_file(out_path + ".meta.json", meta.dump(2) + "\n");
}

CorpusHandle load_corpus(const CommonOpts& opts) {
  CorpusHandle corpus;
  if (!opts.corpus.empty()) {
    check(primal_corpus_load(opts.corpus.c_str(), &corpus.ptr));
  } else if (!opts.train_file.empty() || !opts.validation_file.empty() ||
             !opts.test_file.empty()) {
    if (opts.train_file.empty() || opts.validation_file.empty() || opts.test_file.empty())
      fail(kExitMissingInput, "--train/--validation/--test must be given together");
    check(primal_corpus_load_files(opts.train_file.c_str(), opts.validation_file.c_str(),
                                   opts.test_file.c_str(), &corpus.ptr));
  } else {
    fail(kExitMissingInput, "no corpus given (use --corpus or --train/--validation/--test)");
  }
  return corpus;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_model_paths(
    const std::vector<std::string>& pairs, const char* flag) {
  std::vector<std::string> names, paths;
  for (const std::string& pair : pairs) {
    size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size())
      fail(kExitValidation, std::string(flag) + " expects model=path, got '" + pair + "'");
    names.push_back(pair.substr(0, eq));
    paths.push_back(pair.substr(eq + 1));
  }
  return {names, paths};
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  out.reserve(v.size());
  for (const std::string& s : v) out.push_back(s.c_str());
  return out;
}

// ---- subcommands -----------------------------------------------------------

int cmd_synth(const CommonOpts& opts) {
  if (opts.out.empty()) fail(kExitMissingInput, "synth requires --out");
  json cfg = effective_config(opts);
  uint64_t seed = effective_seed(opts, cfg);
  std::string spec_json = cfg.contains("synth") ? cfg.at("synth").dump() : "{}";

  CorpusHandle corpus;
  check(primal_corpus_synth(spec_json.c_str(), seed, &corpus.ptr));
  check(primal_corpus_save(corpus.ptr, opts.out.c_str()));
  write_run_meta(opts.out, seed, cfg);

  ApiString stats;
  check(primal_corpus_stats(corpus.ptr, "train", &stats.ptr));
  std::cout << "wrote " << opts.out << "\ntrain stats: " << stats.str() << "\n";
  return kExitOk;
}

int cmd_train(const CommonOpts& opts) {
  if (opts.model.empty()) fail(kExitMissingInput, "train requires --model");
  if (opts.out.empty()) fail(kExitMissingInput, "train requires --out");
  json cfg = effective_config(opts);
  uint64_t seed = effective_seed(opts, cfg);
  CorpusHandle corpus = load_corpus(opts);

  ModelHandle model;
  ApiString log;
  check(primal_train(opts.model.c_str(), corpus.ptr, cfg.dump().c_str(), seed, &model.ptr,
                     &log.ptr));
  check(primal_model_save(model.ptr, opts.out.c_str()));
  write_file(opts.out + ".log.json", log.str() + "\n");
  write_run_meta(opts.out, seed, cfg);
  std::cout << "wrote " << opts.out << "\n";
  return kExitOk;
}

int cmd_score(const CommonOpts& opts, const std::string& checkpoint,
              const std::string& graph_out) {
  if (checkpoint.empty()) fail(kExitMissingInput, "score requires --checkpoint");
  if (opts.out.empty()) fail(kExitMissingInput, "score requires --out");
  CorpusHandle corpus = load_corpus(opts);
  ModelHandle model;
  check(primal_model_load(checkpoint.c_str(), &model.ptr));

  if (!opts.model.empty()) {
    ApiString kind;
    check(primal_model_kind(model.ptr, &kind.ptr));
    if (kind.str() != opts.model)
      fail(kExitValidation,
           "checkpoint holds a '" + kind.str() + "' model, not '" + opts.model + "'");
  }

  ApiString scores;
  check(primal_score(model.ptr, corpus.ptr, opts.split.c_str(), &scores.ptr));
  write_file(opts.out, scores.str());

  if (!graph_out.empty()) {
    ApiString graph;
    check(primal_relation_graph(model.ptr, corpus.ptr, opts.split.c_str(), &graph.ptr));
    write_file(graph_out, graph.str());
  }
  std::cout << "wrote " << opts.out << "\n";
  return kExitOk;
}

int cmd_fuse(const CommonOpts& opts, const std::vector<std::string>& dev_pairs,
             const std::vector<std::string>& apply_pairs, const std::string& dev_split,
             const std::string& config_out) {
  if (opts.out.empty()) fail(kExitMissingInput, "fuse requires --out");
  if (dev_pairs.empty()) fail(kExitMissingInput, "fuse requires at least one --dev model=path");
  if (apply_pairs.empty())
    fail(kExitMissingInput, "fuse requires at least one --apply model=path");
  CorpusHandle corpus = load_corpus(opts);

  auto [dev_names, dev_paths] = split_model_paths(dev_pairs, "--dev");
  auto [apply_names, apply_paths] = split_model_paths(apply_pairs, "--apply");

  std::vector<std::string> dev_payloads, apply_payloads;
  for (const std::string& p : dev_paths) dev_payloads.push_back(read_file(p));
  for (const std::string& p : apply_paths) apply_payloads.push_back(read_file(p));

  auto dev_names_c = c_strings(dev_names);
  auto dev_payloads_c = c_strings(dev_payloads);
  ApiString fusion_config;
  check(primal_fusion_fit(corpus.ptr, dev_split.c_str(), dev_names_c.data(),
                          dev_payloads_c.data(), dev_names_c.size(), &fusion_config.ptr));

  auto apply_names_c = c_strings(apply_names);
  auto apply_payloads_c = c_strings(apply_payloads);
  ApiString fused;
  check(primal_fusion_apply(fusion_config.str().c_str(), apply_names_c.data(),
                            apply_payloads_c.data(), apply_names_c.size(), &fused.ptr));

  write_file(opts.out, fused.str());
  if (!config_out.empty()) write_file(config_out, fusion_config.str() + "\n");
  std::cout << "wrote " << opts.out << "\nfusion config: " << fusion_config.str() << "\n";
  return kExitOk;
}

int cmd_eval(const CommonOpts& opts, const std::string& rankings_path, const std::string& name,
             const std::string& banding_file) {
  if (rankings_path.empty()) fail(kExitMissingInput, "eval requires --rankings");
  if (opts.out.empty()) fail(kExitMissingInput, "eval requires --out");
  CorpusHandle corpus = load_corpus(opts);
  std::string rankings = read_file(rankings_path);
  std::string banding = banding_file.empty() ? "" : read_file(banding_file);

  ApiString report;
  check(primal_eval(corpus.ptr, opts.split.c_str(), rankings.c_str(), name.c_str(),
                    banding.empty() ? nullptr : banding.c_str(), &report.ptr));
  write_file(opts.out, report.str());
  std::cout << report.str();
  return kExitOk;
}

int cmd_report(const CommonOpts& opts, const std::vector<std::string>& eval_files,
               const std::vector<std::string>& score_pairs, const std::string& overlap_out) {
  if (eval_files.empty()) fail(kExitMissingInput, "report requires at least one --eval");
  if (opts.out.empty()) fail(kExitMissingInput, "report requires --out");

  std::vector<std::string> payloads;
  for (const std::string& p : eval_files) payloads.push_back(read_file(p));
  auto payloads_c = c_strings(payloads);
  ApiString table;
  check(primal_report_table(payloads_c.data(), payloads_c.size(), &table.ptr));
  write_file(opts.out, table.str());
  std::cout << table.str();

  if (!score_pairs.empty()) {
    if (overlap_out.empty()) fail(kExitMissingInput, "--scores needs --overlap-out");
    CorpusHandle corpus = load_corpus(opts);
    auto [names, paths] = split_model_paths(score_pairs, "--scores");
    std::vector<std::string> score_payloads;
    for (const std::string& p : paths) score_payloads.push_back(read_file(p));
    auto names_c = c_strings(names);
    auto scores_c = c_strings(score_payloads);
    ApiString overlap;
    check(primal_overlap(corpus.ptr, opts.split.c_str(), names_c.data(), scores_c.data(),
                         names_c.size(), &overlap.ptr));
    write_file(overlap_out, overlap.str());
  }
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_corpus = true) {
  if (with_corpus) {
    cmd->add_option("--corpus", opts.corpus, "corpus JSONL with a split field per record");
    cmd->add_option("--train", opts.train_file, "train split file (with --validation/--test)");
    cmd->add_option("--validation", opts.validation_file, "validation split file");
    cmd->add_option("--test", opts.test_file, "test split file");
    cmd->add_option("--split", opts.split, "split to operate on (default test)");
  }
  cmd->add_option("--config", opts.config_file, "JSON config file mirroring RunConfig");
  cmd->add_option("--seed", opts.seed, "RNG seed (overrides config)");
  cmd->add_option("--out", opts.out, "output path");
  cmd->add_option("--profile", opts.profile, "desk|paper hyperparameter profile")
      ->check(CLI::IsMember({"desk", "paper"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"primal: rank the senses of an expression so the primal meaning comes first"};
  app.require_subcommand(1);

  CommonOpts synth_opts, train_opts, score_opts, fuse_opts, eval_opts, report_opts;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth, synth_opts, false);

  CLI::App* train = app.add_subcommand("train", "train one model and write its checkpoint");
  add_common(train, train_opts);
  train->add_option("--model", train_opts.model, "umfs|skipthought|pattern|relgraph")
      ->required();

  std::string checkpoint, graph_out;
  CLI::App* score = app.add_subcommand("score", "score a split with a trained checkpoint");
  add_common(score, score_opts);
  score->add_option("--model", score_opts.model, "expected model kind (checked)");
  score->add_option("--checkpoint", checkpoint, "trained checkpoint path")->required();
  score->add_option("--graph-out", graph_out, "relation-graph edge list output (relgraph)");

  std::vector<std::string> dev_pairs, apply_pairs;
  std::string dev_split = "validation", fusion_config_out;
  CLI::App* fuse = app.add_subcommand("fuse", "fit fusion weights on dev scores and fuse");
  add_common(fuse, fuse_opts);
  fuse->add_option("--dev", dev_pairs, "model=dev_scores.jsonl (repeat per model)");
  fuse->add_option("--apply", apply_pairs, "model=scores.jsonl to fuse (repeat per model)");
  fuse->add_option("--dev-split", dev_split, "gold split the dev scores cover");
  fuse->add_option("--fusion-config", fusion_config_out, "write fitted FusionConfig here");

  std::string rankings_path, eval_name = "model", banding_file;
  CLI::App* eval = app.add_subcommand("eval", "evaluate rankings against gold labels");
  add_common(eval, eval_opts);
  eval->add_option("--rankings", rankings_path, "score or fused records to evaluate");
  eval->add_option("--name", eval_name, "model name for the report");
  eval->add_option("--banding", banding_file, "JSON banding config for buckets");

  std::vector<std::string> eval_files, score_pairs;
  std::string overlap_out;
  CLI::App* report = app.add_subcommand("report", "collate eval reports into one table");
  add_common(report, report_opts);
  report->add_option("--eval", eval_files, "eval report JSON (repeat per model)");
  report->add_option("--scores", score_pairs, "model=scores.jsonl for the overlap counts");
  report->add_option("--overlap-out", overlap_out, "write overlap counts here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitMissingInput;
  }

  try {
    if (*synth) return cmd_synth(synth_opts);
    if (*train) return cmd_train(train_opts);
    if (*score) return cmd_score(score_opts, checkpoint, graph_out);
    if (*fuse) return cmd_fuse(fuse_opts, dev_pairs, apply_pairs, dev_split, fusion_config_out);
    if (*eval) return cmd_eval(eval_opts, rankings_path, eval_name, banding_file);
    if (*report) return cmd_report(report_opts, eval_files, score_pairs, overlap_out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitMissingInput;
}

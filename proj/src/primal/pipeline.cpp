#include "primal/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "primal/errors.hpp"
#include "primal/eval.hpp"
#include "primal/fusion.hpp"
#include "primal/models.hpp"
#include "primal/scores.hpp"

namespace primal {

using nlohmann::json;

namespace {

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

std::map<std::string, std::string> run_pipeline(const SynthSpec& spec, const RunConfig& config,
                                                uint64_t seed, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::map<std::string, std::string> artifacts;
  auto emit = [&](const std::string& name, const std::string& bytes) {
    artifacts[name] = bytes;
    write_file(out_dir + "/" + name, bytes);
  };

  RunConfig run = config;
  run.seed = seed;

  CorpusSplit corpus = generate_synthetic(spec, seed);
  emit("corpus.jsonl", corpus_to_jsonl(corpus));

  json meta;
  meta["seed"] = seed;
  meta["config_hash"] = run.hash();
  meta["version"] = kVersion;
  meta["config"] = json::parse(run.to_json());
  meta["synth_spec"] = json::parse(spec.to_json());
  emit("run_meta.json", meta.dump(2) + "\n");

  const std::vector<std::string> kinds = {"pattern", "relgraph", "skipthought", "umfs"};
  std::vector<std::pair<std::string, std::vector<SenseScores>>> val_scores, test_scores;
  std::map<std::string, Model> models;
  for (const std::string& kind : kinds) {
    std::string log;
    Model model = Model::train(kind, corpus, run, &log);
    emit(kind + ".train_log.json", log + "\n");
    emit(kind + ".ckpt", model.to_checkpoint().serialize());
    std::vector<SenseScores> val = model.score_split(corpus.validation);
    std::vector<SenseScores> test = model.score_split(corpus.test);
    emit("scores_validation_" + kind + ".jsonl", scores_to_jsonl(val));
    emit("scores_test_" + kind + ".jsonl", scores_to_jsonl(test));
    val_scores.emplace_back(kind, std::move(val));
    test_scores.emplace_back(kind, std::move(test));
    models.emplace(kind, std::move(model));
  }

  // Hybrid fuses the three non-baseline models.
  auto pick_models = [&](const std::vector<std::pair<std::string, std::vector<SenseScores>>>& all) {
    std::vector<std::pair<std::string, std::vector<SenseScores>>> out;
    for (const auto& [name, scores] : all)
      if (name != "umfs") out.push_back({name, scores});
    return out;
  };
  FusionConfig fusion = fit_fusion(pick_models(val_scores), corpus.validation);
  emit("fusion_config.json", fusion.to_json() + "\n");
  std::vector<FusedExpression> fused = fuse_all(pick_models(test_scores), fusion);
  emit("fused_test.jsonl", fused_to_jsonl(fused));

  // Evaluate each model and the hybrid on the test split.
  std::vector<EvalReport> reports;
  std::map<std::string, std::string> display = {{"umfs", "UMFS-WE"},
                                                {"skipthought", "Skip-Thought"},
                                                {"pattern", "Pattern Detection"},
                                                {"relgraph", "Relation Graph"}};
  std::vector<std::pair<std::string, std::vector<RankedExpression>>> overlap_inputs;
  for (const std::string& kind : {std::string("umfs"), std::string("skipthought"),
                                  std::string("pattern"), std::string("relgraph")}) {
    for (const auto& [name, scores] : test_scores) {
      if (name != kind) continue;
      auto rankings = rankings_from_scores(scores);
      EvalReport r = evaluate(display[kind], rankings, corpus.test);
      emit("eval_" + kind + ".json", r.to_json());
      reports.push_back(std::move(r));
      if (kind != "umfs") overlap_inputs.emplace_back(display[kind], std::move(rankings));
    }
  }
  std::vector<RankedExpression> hybrid_rankings;
  hybrid_rankings.reserve(fused.size());
  for (const FusedExpression& f : fused) hybrid_rankings.push_back({f.expr_id, f.ranks});
  EvalReport hybrid = evaluate("Hybrid", hybrid_rankings, corpus.test);
  emit("eval_hybrid.json", hybrid.to_json());
  reports.push_back(hybrid);

  emit("report.txt", render_table(reports));
  emit("overlap.json", overlap_report(overlap_inputs, corpus.test).to_json());
  return artifacts;
}

}  // namespace primal

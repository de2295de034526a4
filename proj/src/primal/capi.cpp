#include "primal/primal.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include <json.hpp>

#include "primal/config.hpp"
#include "primal/corpus.hpp"
#include "primal/errors.hpp"
#include "primal/eval.hpp"
#include "primal/fusion.hpp"
#include "primal/models.hpp"
#include "primal/scores.hpp"
#include "primal/synth.hpp"

using namespace primal;

struct primal_corpus {
  CorpusSplit split;
};

struct primal_model {
  Model model;
};

namespace {

thread_local std::string g_last_error = "ok";

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

primal_status fail(primal_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
primal_status guarded(Fn&& fn) {
  try {
    fn();
    return PRIMAL_OK;
  } catch (const IoError& e) {
    return fail(PRIMAL_ERR_IO, e.what());
  } catch (const ParseError& e) {
    return fail(PRIMAL_ERR_PARSE, e.what());
  } catch (const Error& e) {
    return fail(PRIMAL_ERR_INVALID, e.what());
  } catch (const std::exception& e) {
    return fail(PRIMAL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PRIMAL_ERR_INTERNAL, "unknown error");
  }
}

primal_status require(bool cond, const char* what) {
  if (cond) return PRIMAL_OK;
  return fail(PRIMAL_ERR_INVALID, what);
}

RunConfig config_from(const char* config_json) {
  RunConfig config;
  if (config_json && *config_json) config.apply_json_text(config_json);
  return config;
}

std::vector<std::pair<std::string, std::vector<SenseScores>>> parse_model_scores(
    const char* const* model_names, const char* const* scores_jsonl, size_t n) {
  std::vector<std::pair<std::string, std::vector<SenseScores>>> out;
  for (size_t i = 0; i < n; ++i) {
    if (!model_names[i] || !scores_jsonl[i]) throw Error("null model name or scores");
    out.emplace_back(model_names[i], scores_from_jsonl(scores_jsonl[i]));
  }
  return out;
}

std::vector<RankedExpression> rankings_from_any_jsonl(const std::string& text) {
  // Score records and fused records both carry expr_id + ranks.
  std::vector<RankedExpression> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(std::string("bad JSON in rankings: ") + ex.what(), lineno);
    }
    RankedExpression r;
    r.expr_id = j.at("expr_id").get<std::string>();
    r.ranks = j.at("ranks").get<std::vector<int>>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

extern "C" {

const char* primal_version(void) { return kVersion; }

const char* primal_last_error(void) { return g_last_error.c_str(); }

void primal_string_free(char* s) { std::free(s); }

primal_status primal_corpus_load(const char* path, primal_corpus** out) {
  if (require(path && out, "null argument") != PRIMAL_OK) return PRIMAL_ERR_INVALID;
  return guarded([&] {
    auto* c = new primal_corpus{load_corpus_split(path)};
    *out = c;
  });
}

primal_status primal_corpus_load_files(const char* train_path, const char* validation_path,
                                       const char* test_path, primal_corpus** out) {
  if (require(train_path && validation_path && test_path && out, "null argument") != PRIMAL_OK)
    return PRIMAL_ERR_INVALID;
  return guarded([&] {
    auto* c = new primal_corpus{corpus_split_from_files(train_path, validation_path, test_path)};
    *out = c;
  });
}

primal_status primal_corpus_synth(const char* spec_json, uint64_t seed, primal_corpus** out) {
  if (require(out != nullptr, "null argument") != PRIMAL_OK) return PRIMAL_ERR_INVALID;
  return guarded([&] {
    SynthSpec spec;
    if (spec_json && *spec_json) spec = SynthSpec::from_json(spec_json);
    auto* c = new primal_corpus{generate_synthetic(spec, seed)};
    *out = c;
  });
}

primal_status primal_corpus_save(const primal_corpus* corpus, const char* path) {
  if (require(corpus && path, "null argument") != PRIMAL_OK) return PRIMAL_ERR_INVALID;
  return guarded([&] { save_corpus(corpus->split, path); });
}

primal_status primal_corpus_stats(const primal_corpus* corpus, const char* split,
                                  char** out_json) {
  if (require(corpus && split && out_json, "null argument") != PRIMAL_OK)
    return PRIMAL_ERR_INVALID;
  return guarded([&] {
    CorpusStats st = corpus_stats(corpus->split.split(split));
    nlohmann::json j;
    j["count"] = st.count;
    j["mean_senses"] = st.mean_senses;
    j["mean_description_length"] = st.mean_description_length;
    *out_json = dup_string(j.dump());
  });
}

void primal_corpus_free(primal_corpus* corpus) { delete corpus; }

primal_status primal_train(const char* model, const primal_corpus* corpus,
                           const char* config_json, uint64_t seed, primal_model** out,
                           char** out_log_json) {
  if (require(model && corpus && out, "null argument") != PRIMAL_OK) return PRIMAL_ERR_INVALID;
  return guarded([&] {
    RunConfig config = config_from(config_json);
    config.seed = seed;
    std::string log;
    Model trained = Model::train(model, corpus->split, config, &log);
    *out = new primal_model{std::move(trained)};
    if (out_log_json) *out_log_json = dup_string(log);
  });
}

primal_status primal_model_save(const primal_model* model, const char* path) {
  if (require(model && path, "null argument") != PRIMAL_OK) return PRIMAL_ERR_INVALID;
  return guarded([&] { model->model.to_checkpoint().save(path); });
}

primal_status primal_model_load(const char* path, primal_model** out) {
  if (require(path && out, "null argument") != PRIMAL_OK) return PRIMAL_ERR_INVALID;
  return guarded([&] {
    *out = new primal_model{Model::from_checkpoint(Checkpoint::load(path))};
  });
}

primal_status primal_model_kind(const primal_model* model, char** out_kind) {
  if (require(model && out_kind, "null argument") != PRIMAL_OK) return PRIMAL_ERR_INVALID;
  return guarded([&] { *out_kind = dup_string(model->model.kind()); });
}

primal_status primal_score(const primal_model* model, const primal_corpus* corpus,
                           const char* split, char** out_jsonl) {
  if (require(model && corpus && split && out_jsonl, "null argument") != PRIMAL_OK)
    return PRIMAL_ERR_INVALID;
  return guarded([&] {
    auto scores = model->model.score_split(corpus->split.split(split));
    *out_jsonl = dup_string(scores_to_jsonl(scores));
  });
}

primal_status primal_relation_graph(const primal_model* model, const primal_corpus* corpus,
                                    const char* split, char** out_csv) {
  if (require(model && corpus && split && out_csv, "null argument") != PRIMAL_OK)
    return PRIMAL_ERR_INVALID;
  return guarded([&] {
    *out_csv = dup_string(relation_graph_csv(model->model, corpus->split.split(split)));
  });
}

void primal_model_free(primal_model* model) { delete model; }

primal_status primal_fusion_fit(const primal_corpus* corpus, const char* split,
                                const char* const* model_names,
                                const char* const* dev_scores_jsonl, size_t n_models,
                                char** out_config_json) {
  if (require(corpus && split && model_names && dev_scores_jsonl && out_config_json && n_models,
              "null argument") != PRIMAL_OK)
    return PRIMAL_ERR_INVALID;
  return guarded([&] {
    auto by_model = parse_model_scores(model_names, dev_scores_jsonl, n_models);
    FusionConfig config = fit_fusion(by_model, corpus->split.split(split));
    *out_config_json = dup_string(config.to_json());
  });
}

primal_status primal_fusion_apply(const char* config_json, const char* const* model_names,
                                  const char* const* scores_jsonl, size_t n_models,
                                  char** out_fused_jsonl) {
  if (require(config_json && model_names && scores_jsonl && out_fused_jsonl && n_models,
              "null argument") != PRIMAL_OK)
    return PRIMAL_ERR_INVALID;
  return guarded([&] {
    FusionConfig config = FusionConfig::from_json(config_json);
    auto by_model = parse_model_scores(model_names, scores_jsonl, n_models);
    *out_fused_jsonl = dup_string(fused_to_jsonl(fuse_all(by_model, config)));
  });
}

primal_status primal_eval(const primal_corpus* corpus, const char* split,
                          const char* rankings_jsonl, const char* model_name,
                          const char* banding_json, char** out_report_json) {
  if (require(corpus && split && rankings_jsonl && model_name && out_report_json,
              "null argument") != PRIMAL_OK)
    return PRIMAL_ERR_INVALID;
  return guarded([&] {
    BandingConfig banding;
    if (banding_json && *banding_json) {
      nlohmann::json j = nlohmann::json::parse(banding_json);
      if (j.contains("sense_count_edges"))
        banding.sense_count_edges = j.at("sense_count_edges").get<std::vector<int>>();
      if (j.contains("desc_len_quantiles"))
        banding.desc_len_quantiles = j.at("desc_len_quantiles").get<int>();
      if (j.contains("tf_bands")) banding.tf_bands = j.at("tf_bands").get<bool>();
    }
    auto rankings = rankings_from_any_jsonl(rankings_jsonl);
    EvalReport report =
        evaluate(model_name, rankings, corpus->split.split(split), banding);
    *out_report_json = dup_string(report.to_json());
  });
}

primal_status primal_report_table(const char* const* eval_reports_json, size_t n_reports,
                                  char** out_table) {
  if (require(eval_reports_json && out_table && n_reports, "null argument") != PRIMAL_OK)
    return PRIMAL_ERR_INVALID;
  return guarded([&] {
    std::vector<EvalReport> reports;
    for (size_t i = 0; i < n_reports; ++i) {
      if (!eval_reports_json[i]) throw Error("null eval report");
      reports.push_back(EvalReport::from_json(eval_reports_json[i]));
    }
    *out_table = dup_string(render_table(reports));
  });
}

primal_status primal_overlap(const primal_corpus* corpus, const char* split,
                             const char* const* model_names,
                             const char* const* scores_jsonl, size_t n_models,
                             char** out_json) {
  if (require(corpus && split && model_names && scores_jsonl && out_json && n_models >= 2,
              "need at least two models") != PRIMAL_OK)
    return PRIMAL_ERR_INVALID;
  return guarded([&] {
    std::vector<std::pair<std::string, std::vector<RankedExpression>>> per_model;
    for (size_t i = 0; i < n_models; ++i) {
      if (!model_names[i] || !scores_jsonl[i]) throw Error("null model name or scores");
      per_model.emplace_back(model_names[i],
                             rankings_from_scores(scores_from_jsonl(scores_jsonl[i])));
    }
    OverlapReport report = overlap_report(per_model, corpus->split.split(split));
    *out_json = dup_string(report.to_json());
  });
}

}  // extern "C"

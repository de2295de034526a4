#include "primal/scores.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "primal/errors.hpp"

namespace primal {

using nlohmann::json;

std::vector<int> ranks_from_scores(std::span<const double> scores) {
  std::vector<int> ranks(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    int r = 1;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (scores[j] > scores[i]) ++r;
      else if (scores[j] == scores[i] && j < i) ++r;
    }
    ranks[i] = r;
  }
  return ranks;
}

SenseScores make_sense_scores(std::string expr_id, std::string model,
                              std::vector<double> scores, std::vector<int> flagged) {
  SenseScores s;
  s.expr_id = std::move(expr_id);
  s.model = std::move(model);
  s.ranks = ranks_from_scores(scores);
  s.scores = std::move(scores);
  s.flagged = std::move(flagged);
  return s;
}

std::string scores_to_jsonl(const std::vector<SenseScores>& scores) {
  std::ostringstream out;
  for (const SenseScores& s : scores) {
    json j;
    j["expr_id"] = s.expr_id;
    j["model"] = s.model;
    j["scores"] = s.scores;
    j["ranks"] = s.ranks;
    j["flagged"] = s.flagged;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::vector<SenseScores> scores_from_jsonl(const std::string& text) {
  std::vector<SenseScores> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw ParseError(std::string("bad JSON in scores: ") + ex.what(), lineno);
    }
    SenseScores s;
    try {
      s.expr_id = j.at("expr_id").get<std::string>();
      s.model = j.at("model").get<std::string>();
      s.scores = j.at("scores").get<std::vector<double>>();
      s.ranks = j.at("ranks").get<std::vector<int>>();
      if (j.contains("flagged")) s.flagged = j.at("flagged").get<std::vector<int>>();
    } catch (const json::exception& ex) {
      throw ParseError(std::string("bad scores record: ") + ex.what(), lineno);
    }
    if (s.ranks.size() != s.scores.size())
      throw ParseError("scores/ranks length mismatch for '" + s.expr_id + "'", lineno);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SenseScores> load_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scores file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scores_from_jsonl(buf.str());
}

void save_scores(const std::vector<SenseScores>& scores, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scores file: " + path);
  out << scores_to_jsonl(scores);
}

}  // namespace primal

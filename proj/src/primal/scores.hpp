#pragma once

#include <span>
#include <string>
#include <vector>

namespace primal {

// Per-expression output of one scoring model. ranks[i] is the 1-based rank
// of sense i under descending scores, ties broken by ascending sense index.
struct SenseScores {
  std::string expr_id;
  std::string model;
  std::vector<double> scores;
  std::vector<int> ranks;
  std::vector<int> flagged;  // senses whose score was degenerate (zero-norm cosine)

  size_t sense_count() const { return scores.size(); }
};

std::vector<int> ranks_from_scores(std::span<const double> scores);

SenseScores make_sense_scores(std::string expr_id, std::string model,
                              std::vector<double> scores, std::vector<int> flagged = {});

// Line-oriented JSON serialization of score records.
std::string scores_to_jsonl(const std::vector<SenseScores>& scores);
std::vector<SenseScores> scores_from_jsonl(const std::string& text);
std::vector<SenseScores> load_scores(const std::string& path);
void save_scores(const std::vector<SenseScores>& scores, const std::string& path);

}  // namespace primal

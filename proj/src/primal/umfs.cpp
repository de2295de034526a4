#include "primal/umfs.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "primal/errors.hpp"

namespace primal {

std::string UmfsReport::to_json() const {
  nlohmann::json j;
  j["pairs_trained"] = pairs_trained;
  return j.dump();
}

UmfsModel::UmfsModel(Vocab vocab, int dim) : vocab_(std::move(vocab)), dim_(dim) {
  if (dim < 1) throw Error("umfs: embedding dim must be positive");
  size_t n = static_cast<size_t>(vocab_.size()) * static_cast<size_t>(dim);
  syn0_.assign(n, 0.0);
  syn1_.assign(n, 0.0);
}

std::vector<double> UmfsModel::text_vector(std::span<const int> indices) const {
  std::vector<double> v(static_cast<size_t>(dim_), 0.0);
  if (indices.empty()) return v;
  for (int idx : indices) {
    const double* r = syn0_.data() + static_cast<size_t>(idx) * static_cast<size_t>(dim_);
    for (int k = 0; k < dim_; ++k) v[static_cast<size_t>(k)] += r[k];
  }
  for (double& x : v) x /= static_cast<double>(indices.size());
  return v;
}

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b, bool* degenerate) {
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na < 1e-24 || nb < 1e-24) {
    *degenerate = true;
    return 0.0;
  }
  *degenerate = false;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

SenseScores UmfsModel::score(const Expression& expr, const Vocab& vocab) const {
  if (expr.senses.size() < 2)
    throw Error("expression '" + expr.id + "' has fewer than 2 senses");
  // No truncation here: the mean embedding is cheap at any length.
  std::vector<int> surface = encode_text(vocab, expr.surface,
                                         static_cast<int>(expr.surface.size()));
  std::vector<double> v_e = text_vector(surface);

  std::vector<double> scores;
  std::vector<int> flagged;
  for (size_t i = 0; i < expr.senses.size(); ++i) {
    std::vector<int> desc = encode_text(vocab, expr.senses[i].description,
                                        static_cast<int>(expr.senses[i].description.size()));
    std::vector<double> v_i = text_vector(desc);
    bool degenerate = false;
    double c = cosine(v_i, v_e, &degenerate);
    scores.push_back(c);
    if (degenerate) flagged.push_back(static_cast<int>(i));
  }
  return make_sense_scores(expr.id, kName, std::move(scores), std::move(flagged));
}

UmfsReport train_umfs(UmfsModel& model, const std::vector<Expression>& train,
                      const RunConfig& config, Rng& rng) {
  if (train.empty()) throw Error("train_umfs: empty training corpus");
  const Vocab& vocab = model.vocab();
  const int dim = model.dim();
  const size_t v = static_cast<size_t>(vocab.size());

  // Sentences: every surface and every description.
  std::vector<std::vector<int>> sentences;
  for (const Expression& e : train) {
    sentences.push_back(encode_text(vocab, e.surface, static_cast<int>(e.surface.size())));
    for (const Sense& s : e.senses)
      sentences.push_back(
          encode_text(vocab, s.description, static_cast<int>(s.description.size())));
  }

  // Unigram^0.75 table for negative sampling.
  std::vector<double> counts(v, 0.0);
  for (const auto& sent : sentences)
    for (int idx : sent) counts[static_cast<size_t>(idx)] += 1.0;
  std::vector<double> cdf(v, 0.0);
  double total = 0;
  for (size_t i = 0; i < v; ++i) {
    total += std::pow(counts[i], 0.75);
    cdf[i] = total;
  }
  if (total <= 0) throw Error("train_umfs: no text");
  auto sample_negative = [&]() {
    double r = rng.unit() * total;
    size_t lo = 0, hi = v - 1;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (cdf[mid] < r)
        lo = mid + 1;
      else
        hi = mid;
    }
    return static_cast<int>(lo);
  };

  // Init syn0 like word2vec: small uniform noise; syn1 stays zero.
  auto& syn0 = model.input_vectors();
  auto& syn1 = model.output_vectors();
  for (double& x : syn0) x = (rng.unit() - 0.5) / dim;

  size_t total_pairs = 0;
  for (const auto& sent : sentences) total_pairs += sent.size();
  size_t steps = 0;
  const size_t plan = total_pairs * static_cast<size_t>(config.umfs_epochs);

  UmfsReport report;
  std::vector<double> hidden(static_cast<size_t>(dim));
  for (int epoch = 0; epoch < config.umfs_epochs; ++epoch) {
    for (const auto& sent : sentences) {
      for (size_t pos = 0; pos < sent.size(); ++pos) {
        ++steps;
        double lr = config.umfs_lr *
                    std::max(1.0 - static_cast<double>(steps) / static_cast<double>(plan + 1),
                             1e-4);
        int center = sent[pos];
        size_t lo = pos > static_cast<size_t>(config.umfs_window)
                        ? pos - static_cast<size_t>(config.umfs_window)
                        : 0;
        size_t hi = std::min(sent.size(), pos + static_cast<size_t>(config.umfs_window) + 1);
        for (size_t cpos = lo; cpos < hi; ++cpos) {
          if (cpos == pos) continue;
          int context = sent[cpos];
          double* in = syn0.data() + static_cast<size_t>(center) * static_cast<size_t>(dim);
          std::fill(hidden.begin(), hidden.end(), 0.0);
          // Positive pair plus sampled negatives, logistic loss.
          for (int n = 0; n <= config.umfs_negatives; ++n) {
            int target = n == 0 ? context : sample_negative();
            double label = n == 0 ? 1.0 : 0.0;
            if (n > 0 && target == context) continue;
            double* out = syn1.data() + static_cast<size_t>(target) * static_cast<size_t>(dim);
            double dot = 0;
            for (int k = 0; k < dim; ++k) dot += in[k] * out[k];
            double pred = 1.0 / (1.0 + std::exp(-dot));
            double g = (label - pred) * lr;
            for (int k = 0; k < dim; ++k) {
              hidden[static_cast<size_t>(k)] += g * out[k];
              out[k] += g * in[k];
            }
          }
          for (int k = 0; k < dim; ++k) in[k] += hidden[static_cast<size_t>(k)];
          ++report.pairs_trained;
        }
      }
    }
  }
  return report;
}

}  // namespace primal

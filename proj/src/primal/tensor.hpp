#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "primal/rng.hpp"

namespace primal::nd {

using Shape = std::vector<size_t>;
using primal::Rng;

std::string shape_str(const Shape& s);

// One recorded value in the computation graph. Nodes are immutable after
// creation except for their grad buffer, so creation order (id) is a valid
// topological order.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until backward touches it
  bool requires_grad = false;
  uint64_t id = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // adds into parents' grads

  size_t size() const { return data.size(); }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

// Value-semantics handle over a graph node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  // Uniform(lo, hi) init from the given stream.
  static Tensor uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad = true);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  size_t size() const { return node_->data.size(); }
  size_t rows() const { return node_->shape.at(0); }
  size_t cols() const { return node_->shape.at(1); }
  double value() const;  // scalar tensors only
  double at(size_t i) const { return node_->data.at(i); }

  std::span<const double> data() const { return node_->data; }
  std::span<double> mutable_data() { return node_->data; }
  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() == node_->data.size(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }
  void zero_grad() { node_->grad.clear(); }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& share() const { return node_; }

  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<Node> node_;
};

// ---- published operations ------------------------------------------------
// Each op validates shapes (error names the op and both shapes) and records
// itself on the tape when any input requires grad.

Tensor add(const Tensor& a, const Tensor& b);            // same shape
Tensor add_rowvec(const Tensor& mat, const Tensor& row); // (r x c) + (1 x c)
Tensor mul(const Tensor& a, const Tensor& b);            // elementwise
Tensor scale(const Tensor& a, double c);
Tensor matmul(const Tensor& a, const Tensor& b);         // (r x k)·(k x c)
Tensor matmul_nt(const Tensor& a, const Tensor& b);      // A · B^T
Tensor transpose(const Tensor& a);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, size_t begin, size_t end);
Tensor row(const Tensor& a, size_t r);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);  // throws on non-positive input
Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);
Tensor pick(const Tensor& a, size_t index);  // scalar a.data[index]
Tensor sum(const Tensor& a);                 // scalar
Tensor mean(const Tensor& a);                // scalar
Tensor mean_rows(const Tensor& a);           // (r x c) -> (1 x c)
Tensor rows_sum(const Tensor& a);            // (r x c) -> (r x 1)
Tensor take_diag(const Tensor& a);           // (n x n) -> (n x 1)
Tensor embedding_lookup(const Tensor& table, std::span<const int> indices);
// Inverted dropout: scales kept activations by 1/(1-rate) at train time and
// is the identity at eval time or rate 0.
Tensor dropout(const Tensor& a, double rate, bool train, Rng& rng);

// The replayable recording of every node reachable from a root, ordered by
// creation id (a topological order by construction).
struct Tape {
  std::vector<Node*> ordered;
  static Tape trace(Node* root);
};

// Seeds d(loss)/d(loss) = 1 and accumulates gradients into every
// requires_grad node reachable from loss. Each node's rule runs exactly once.
void backward(const Tensor& loss);

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
};

// Central-difference check of reverse-mode gradients for a deterministic
// scalar function of the given parameters. Throws if f is non-finite.
GradCheckReport grad_check(const std::function<Tensor()>& f, std::span<Tensor> params,
                           double step = 1e-5, double tol = 1e-4);

}  // namespace primal::nd

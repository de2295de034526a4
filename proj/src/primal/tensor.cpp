#include "primal/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "primal/errors.hpp"

namespace primal::nd {

namespace {

uint64_t next_id() {
  // Tapes are confined to one worker; a thread-local counter keeps ids
  // monotone within that worker.
  thread_local uint64_t counter = 0;
  return ++counter;
}

size_t shape_size(const Shape& s) {
  size_t n = 1;
  for (size_t d : s) {
    if (d == 0) throw Error("tensor shape has zero dimension");
    n *= d;
  }
  return s.empty() ? 0 : n;
}

void require_2d(const char* op, const Tensor& t) {
  if (t.shape().size() != 2)
    throw Error(std::string(op) + ": expected 2-d tensor, got " + shape_str(t.shape()));
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(std::string(op) + ": shape mismatch (" + shape_str(a.shape()) + " vs " +
              shape_str(b.shape()) + ")");
}

std::shared_ptr<Node> new_node(Shape shape, std::vector<double> data) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->id = next_id();
  return n;
}

// Builds an op node. Parent links and the backward rule are only kept when
// some input requires grad.
Tensor make_op(const char* op, Shape shape, std::vector<double> data,
               std::vector<Tensor> parents, std::function<void(Node&)> backprop) {
  auto n = new_node(std::move(shape), std::move(data));
  n->op = op;
  bool needs = false;
  for (const Tensor& p : parents) needs = needs || p.requires_grad();
  if (needs) {
    n->requires_grad = true;
    n->parents.reserve(parents.size());
    for (const Tensor& p : parents) n->parents.push_back(p.share());
    n->backprop = std::move(backprop);
  }
  return Tensor(std::move(n));
}

double checked(double v, const char* op) {
  if (!std::isfinite(v)) throw Error(std::string(op) + ": non-finite value produced");
  return v;
}

}  // namespace

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ")";
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = new_node(shape, std::vector<double>(shape_size(shape), 0.0));
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_size(shape) != data.size())
    throw Error("tensor: data length " + std::to_string(data.size()) + " does not match shape " +
                shape_str(shape));
  auto n = new_node(std::move(shape), std::move(data));
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

Tensor Tensor::uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad) {
  std::vector<double> data(shape_size(shape));
  for (double& v : data) v = rng.uniform(lo, hi);
  return from(std::move(shape), std::move(data), requires_grad);
}

double Tensor::value() const {
  if (size() != 1) throw Error("value(): tensor is not scalar, shape " + shape_str(shape()));
  return node_->data[0];
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("add", a, b);
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
  return make_op("add", a.shape(), std::move(out), {a, b}, [](Node& n) {
    for (int p = 0; p < 2; ++p) {
      Node& parent = *n.parents[static_cast<size_t>(p)];
      if (!parent.requires_grad) continue;
      parent.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) parent.grad[i] += n.grad[i];
    }
  });
}

Tensor add_rowvec(const Tensor& mat, const Tensor& rowv) {
  require_2d("add_rowvec", mat);
  require_2d("add_rowvec", rowv);
  if (rowv.rows() != 1 || rowv.cols() != mat.cols()) shape_error("add_rowvec", mat, rowv);
  size_t r = mat.rows(), c = mat.cols();
  std::vector<double> out(mat.size());
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) out[i * c + j] = mat.at(i * c + j) + rowv.at(j);
  return make_op("add_rowvec", mat.shape(), std::move(out), {mat, rowv}, [r, c](Node& n) {
    Node& m = *n.parents[0];
    Node& v = *n.parents[1];
    if (m.requires_grad) {
      m.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) m.grad[i] += n.grad[i];
    }
    if (v.requires_grad) {
      v.ensure_grad();
      for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) v.grad[j] += n.grad[i * c + j];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul", a, b);
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
  return make_op("mul", a.shape(), std::move(out), {a, b}, [](Node& n) {
    Node& a_ = *n.parents[0];
    Node& b_ = *n.parents[1];
    if (a_.requires_grad) {
      a_.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) a_.grad[i] += n.grad[i] * b_.data[i];
    }
    if (b_.requires_grad) {
      b_.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) b_.grad[i] += n.grad[i] * a_.data[i];
    }
  });
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * c;
  return make_op("scale", a.shape(), std::move(out), {a}, [c](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) a_.grad[i] += n.grad[i] * c;
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d("matmul", a);
  require_2d("matmul", b);
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  size_t r = a.rows(), k = a.cols(), c = b.cols();
  std::vector<double> out(r * c, 0.0);
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  for (size_t i = 0; i < r; ++i)
    for (size_t t = 0; t < k; ++t) {
      double av = ad[i * k + t];
      if (av == 0.0) continue;
      const double* brow = bd + t * c;
      double* orow = out.data() + i * c;
      for (size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
    }
  return make_op("matmul", {r, c}, std::move(out), {a, b}, [r, k, c](Node& n) {
    Node& a_ = *n.parents[0];
    Node& b_ = *n.parents[1];
    if (a_.requires_grad) {
      a_.ensure_grad();  // dA = dC · B^T
      for (size_t i = 0; i < r; ++i)
        for (size_t t = 0; t < k; ++t) {
          double acc = 0;
          const double* grow = n.grad.data() + i * c;
          const double* brow = b_.data.data() + t * c;
          for (size_t j = 0; j < c; ++j) acc += grow[j] * brow[j];
          a_.grad[i * k + t] += acc;
        }
    }
    if (b_.requires_grad) {
      b_.ensure_grad();  // dB = A^T · dC
      for (size_t i = 0; i < r; ++i)
        for (size_t t = 0; t < k; ++t) {
          double av = a_.data[i * k + t];
          if (av == 0.0) continue;
          const double* grow = n.grad.data() + i * c;
          double* brow = b_.grad.data() + t * c;
          for (size_t j = 0; j < c; ++j) brow[j] += av * grow[j];
        }
    }
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_2d("matmul_nt", a);
  require_2d("matmul_nt", b);
  if (a.cols() != b.cols()) shape_error("matmul_nt", a, b);
  size_t r = a.rows(), k = a.cols(), c = b.rows();
  std::vector<double> out(r * c, 0.0);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) {
      double acc = 0;
      const double* arow = a.data().data() + i * k;
      const double* brow = b.data().data() + j * k;
      for (size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
      out[i * c + j] = acc;
    }
  return make_op("matmul_nt", {r, c}, std::move(out), {a, b}, [r, k, c](Node& n) {
    Node& a_ = *n.parents[0];
    Node& b_ = *n.parents[1];
    if (a_.requires_grad) {
      a_.ensure_grad();  // dA = dC · B
      for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) {
          double g = n.grad[i * c + j];
          if (g == 0.0) continue;
          const double* brow = b_.data.data() + j * k;
          double* arow = a_.grad.data() + i * k;
          for (size_t t = 0; t < k; ++t) arow[t] += g * brow[t];
        }
    }
    if (b_.requires_grad) {
      b_.ensure_grad();  // dB = dC^T · A
      for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) {
          double g = n.grad[i * c + j];
          if (g == 0.0) continue;
          const double* arow = a_.data.data() + i * k;
          double* brow = b_.grad.data() + j * k;
          for (size_t t = 0; t < k; ++t) brow[t] += g * arow[t];
        }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_2d("transpose", a);
  size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) out[j * r + i] = a.at(i * c + j);
  return make_op("transpose", {c, r}, std::move(out), {a}, [r, c](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < c; ++j) a_.grad[i * c + j] += n.grad[j * r + i];
  });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error("concat_rows: no inputs");
  size_t c = 0, r = 0;
  for (const Tensor& p : parts) {
    require_2d("concat_rows", p);
    if (c == 0) c = p.cols();
    if (p.cols() != c) shape_error("concat_rows", parts[0], p);
    r += p.rows();
  }
  std::vector<double> out;
  out.reserve(r * c);
  for (const Tensor& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return make_op("concat_rows", {r, c}, std::move(out), std::move(parents), [](Node& n) {
    size_t offset = 0;
    for (auto& pp : n.parents) {
      Node& p = *pp;
      if (p.requires_grad) {
        p.ensure_grad();
        for (size_t i = 0; i < p.data.size(); ++i) p.grad[i] += n.grad[offset + i];
      }
      offset += p.data.size();
    }
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error("concat_cols: no inputs");
  size_t r = 0, c = 0;
  for (const Tensor& p : parts) {
    require_2d("concat_cols", p);
    if (r == 0) r = p.rows();
    if (p.rows() != r) shape_error("concat_cols", parts[0], p);
    c += p.cols();
  }
  std::vector<double> out(r * c);
  size_t col_off = 0;
  for (const Tensor& p : parts) {
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < p.cols(); ++j) out[i * c + col_off + j] = p.at(i * p.cols() + j);
    col_off += p.cols();
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return make_op("concat_cols", {r, c}, std::move(out), std::move(parents), [r, c](Node& n) {
    size_t col_off = 0;
    for (auto& pp : n.parents) {
      Node& p = *pp;
      size_t pc = p.shape[1];
      if (p.requires_grad) {
        p.ensure_grad();
        for (size_t i = 0; i < r; ++i)
          for (size_t j = 0; j < pc; ++j) p.grad[i * pc + j] += n.grad[i * c + col_off + j];
      }
      col_off += pc;
    }
  });
}

Tensor slice_cols(const Tensor& a, size_t begin, size_t end) {
  require_2d("slice_cols", a);
  if (begin >= end || end > a.cols())
    throw Error("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                ") out of bounds for " + shape_str(a.shape()));
  size_t r = a.rows(), c = a.cols(), w = end - begin;
  std::vector<double> out(r * w);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < w; ++j) out[i * w + j] = a.at(i * c + begin + j);
  return make_op("slice_cols", {r, w}, std::move(out), {a}, [r, c, w, begin](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < w; ++j) a_.grad[i * c + begin + j] += n.grad[i * w + j];
  });
}

Tensor row(const Tensor& a, size_t r) {
  require_2d("row", a);
  if (r >= a.rows())
    throw Error("row: index " + std::to_string(r) + " out of bounds for " + shape_str(a.shape()));
  size_t c = a.cols();
  std::vector<double> out(a.data().begin() + static_cast<long>(r * c),
                          a.data().begin() + static_cast<long>((r + 1) * c));
  return make_op("row", {1, c}, std::move(out), {a}, [r, c](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t j = 0; j < c; ++j) a_.grad[r * c + j] += n.grad[j];
  });
}

namespace {

template <typename Fwd, typename Bwd>
Tensor unary_op(const char* name, const Tensor& a, Fwd fwd, Bwd bwd) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(a.at(i));
  return make_op(name, a.shape(), std::move(out), {a}, [bwd](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i)
      a_.grad[i] += n.grad[i] * bwd(a_.data[i], n.data[i]);
  });
}

}  // namespace

Tensor tanh(const Tensor& a) {
  return unary_op(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  auto sig = [](double x) {
    // stable in both tails
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  };
  return unary_op(
      "sigmoid", a, sig, [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& a) {
  auto e = unary_op(
      "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
  for (double v : e.data()) checked(v, "exp");
  return e;
}

Tensor log(const Tensor& a) {
  for (double v : a.data())
    if (v <= 0.0) throw Error("log: non-positive input " + std::to_string(v));
  return unary_op(
      "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor softmax_rows(const Tensor& a) {
  require_2d("softmax_rows", a);
  size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  for (size_t i = 0; i < r; ++i) {
    const double* xi = a.data().data() + i * c;
    double mx = *std::max_element(xi, xi + c);
    double z = 0;
    for (size_t j = 0; j < c; ++j) z += std::exp(xi[j] - mx);
    for (size_t j = 0; j < c; ++j) out[i * c + j] = std::exp(xi[j] - mx) / z;
  }
  return make_op("softmax_rows", a.shape(), std::move(out), {a}, [r, c](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < r; ++i) {
      const double* y = n.data.data() + i * c;
      const double* dy = n.grad.data() + i * c;
      double dot = 0;
      for (size_t j = 0; j < c; ++j) dot += dy[j] * y[j];
      for (size_t j = 0; j < c; ++j) a_.grad[i * c + j] += y[j] * (dy[j] - dot);
    }
  });
}

Tensor log_softmax_rows(const Tensor& a) {
  require_2d("log_softmax_rows", a);
  size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  for (size_t i = 0; i < r; ++i) {
    const double* xi = a.data().data() + i * c;
    double mx = *std::max_element(xi, xi + c);
    double z = 0;
    for (size_t j = 0; j < c; ++j) z += std::exp(xi[j] - mx);
    double lz = mx + std::log(z);
    for (size_t j = 0; j < c; ++j) out[i * c + j] = xi[j] - lz;
  }
  return make_op("log_softmax_rows", a.shape(), std::move(out), {a}, [r, c](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < r; ++i) {
      const double* y = n.data.data() + i * c;
      const double* dy = n.grad.data() + i * c;
      double gsum = 0;
      for (size_t j = 0; j < c; ++j) gsum += dy[j];
      for (size_t j = 0; j < c; ++j) a_.grad[i * c + j] += dy[j] - std::exp(y[j]) * gsum;
    }
  });
}

Tensor pick(const Tensor& a, size_t index) {
  if (index >= a.size())
    throw Error("pick: index " + std::to_string(index) + " out of bounds for " +
                shape_str(a.shape()));
  return make_op("pick", {1}, {a.at(index)}, {a}, [index](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    a_.grad[index] += n.grad[0];
  });
}

Tensor sum(const Tensor& a) {
  double s = 0;
  for (double v : a.data()) s += v;
  return make_op("sum", {1}, {s}, {a}, [](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (double& g : a_.grad) g += n.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  double s = 0;
  for (double v : a.data()) s += v;
  double inv = 1.0 / static_cast<double>(a.size());
  return make_op("mean", {1}, {s * inv}, {a}, [inv](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (double& g : a_.grad) g += n.grad[0] * inv;
  });
}

Tensor mean_rows(const Tensor& a) {
  require_2d("mean_rows", a);
  size_t r = a.rows(), c = a.cols();
  std::vector<double> out(c, 0.0);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) out[j] += a.at(i * c + j);
  double inv = 1.0 / static_cast<double>(r);
  for (double& v : out) v *= inv;
  return make_op("mean_rows", {1, c}, std::move(out), {a}, [r, c, inv](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < c; ++j) a_.grad[i * c + j] += n.grad[j] * inv;
  });
}

Tensor rows_sum(const Tensor& a) {
  require_2d("rows_sum", a);
  size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r, 0.0);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) out[i] += a.at(i * c + j);
  return make_op("rows_sum", {r, 1}, std::move(out), {a}, [r, c](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < c; ++j) a_.grad[i * c + j] += n.grad[i];
  });
}

Tensor take_diag(const Tensor& a) {
  require_2d("take_diag", a);
  if (a.rows() != a.cols()) throw Error("take_diag: matrix not square " + shape_str(a.shape()));
  size_t n_ = a.rows();
  std::vector<double> out(n_);
  for (size_t i = 0; i < n_; ++i) out[i] = a.at(i * n_ + i);
  return make_op("take_diag", {n_, 1}, std::move(out), {a}, [n_](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < n_; ++i) a_.grad[i * n_ + i] += n.grad[i];
  });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> indices) {
  require_2d("embedding_lookup", table);
  if (indices.empty()) throw Error("embedding_lookup: empty index sequence");
  size_t v = table.rows(), d = table.cols(), l = indices.size();
  std::vector<size_t> idx(l);
  for (size_t t = 0; t < l; ++t) {
    if (indices[t] < 0 || static_cast<size_t>(indices[t]) >= v)
      throw Error("embedding_lookup: index " + std::to_string(indices[t]) +
                  " out of bounds for table " + shape_str(table.shape()));
    idx[t] = static_cast<size_t>(indices[t]);
  }
  std::vector<double> out(l * d);
  for (size_t t = 0; t < l; ++t)
    for (size_t j = 0; j < d; ++j) out[t * d + j] = table.at(idx[t] * d + j);
  return make_op("embedding_lookup", {l, d}, std::move(out), {table},
                 [idx = std::move(idx), d](Node& n) {
                   Node& e = *n.parents[0];
                   e.ensure_grad();
                   for (size_t t = 0; t < idx.size(); ++t)
                     for (size_t j = 0; j < d; ++j) e.grad[idx[t] * d + j] += n.grad[t * d + j];
                 });
}

Tensor dropout(const Tensor& a, double rate, bool train, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw Error("dropout: rate must lie in [0,1)");
  if (!train || rate == 0.0) return a;
  double keep = 1.0 - rate;
  std::vector<double> mask(a.size());
  for (double& m : mask) m = rng.unit() < rate ? 0.0 : 1.0 / keep;
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * mask[i];
  return make_op("dropout", a.shape(), std::move(out), {a}, [mask = std::move(mask)](Node& n) {
    Node& a_ = *n.parents[0];
    a_.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) a_.grad[i] += n.grad[i] * mask[i];
  });
}

Tape Tape::trace(Node* root) {
  Tape tape;
  if (!root->requires_grad) return tape;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root};
  seen.insert(root);
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    tape.ordered.push_back(n);
    for (const auto& p : n->parents)
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
  }
  std::sort(tape.ordered.begin(), tape.ordered.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });
  return tape;
}

void backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw Error("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  if (!loss.requires_grad())
    throw Error("backward: loss does not depend on any requires_grad tensor");
  Tape tape = Tape::trace(loss.node());
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (Node* n : tape.ordered) {
    if (!n->backprop) continue;
    n->ensure_grad();
    n->backprop(*n);
  }
}

GradCheckReport grad_check(const std::function<Tensor()>& f, std::span<Tensor> params,
                           double step, double tol) {
  for (Tensor& p : params) p.zero_grad();
  Tensor loss = f();
  double base = loss.value();
  if (!std::isfinite(base)) throw Error("grad_check: non-finite loss");
  backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Tensor& p : params) {
    if (p.has_grad())
      analytic.emplace_back(p.grad().begin(), p.grad().end());
    else
      analytic.emplace_back(p.size(), 0.0);
  }

  GradCheckReport report;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = params[pi];
    for (size_t i = 0; i < p.size(); ++i) {
      double saved = p.mutable_data()[i];
      p.mutable_data()[i] = saved + step;
      double up = f().value();
      p.mutable_data()[i] = saved - step;
      double down = f().value();
      p.mutable_data()[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) throw Error("grad_check: non-finite loss");
      double numeric = (up - down) / (2.0 * step);
      double a = analytic[pi][i];
      double denom = std::max(std::abs(a), std::abs(numeric));
      double err = denom < 1e-7 ? std::abs(a - numeric) : std::abs(a - numeric) / denom;
      report.max_rel_err = std::max(report.max_rel_err, err);
    }
  }
  report.pass = report.max_rel_err <= tol;
  for (Tensor& p : params) p.zero_grad();
  return report;
}

}  // namespace primal::nd

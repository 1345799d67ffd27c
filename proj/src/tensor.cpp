#include "hlm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hlm {

Param& ParamSet::add(const std::string& name, int rows, int cols) {
  for (const auto& p : params_)
    if (p->name == name) fail(ErrorCode::InvalidArgument, "duplicate parameter: " + name);
  params_.push_back(std::make_unique<Param>(name, rows, cols));
  return *params_.back();
}

Param& ParamSet::at(const std::string& name) {
  for (const auto& p : params_)
    if (p->name == name) return *p;
  fail(ErrorCode::InvalidArgument, "unknown parameter: " + name);
}

const Param& ParamSet::at(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return *p;
  fail(ErrorCode::InvalidArgument, "unknown parameter: " + name);
}

std::size_t ParamSet::total_size() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p->value.size();
  return total;
}

void ParamSet::zero_grads() {
  for (const auto& p : params_) p->zero_grad();
}

std::vector<double> ParamSet::snapshot_values() const {
  std::vector<double> out;
  out.reserve(total_size());
  for (const auto& p : params_) out.insert(out.end(), p->value.begin(), p->value.end());
  return out;
}

void ParamSet::restore_values(const std::vector<double>& snapshot) {
  if (snapshot.size() != total_size())
    fail(ErrorCode::ShapeMismatch, "snapshot size does not match parameter set");
  std::size_t offset = 0;
  for (const auto& p : params_) {
    std::copy(snapshot.begin() + static_cast<std::ptrdiff_t>(offset),
              snapshot.begin() + static_cast<std::ptrdiff_t>(offset + p->value.size()),
              p->value.begin());
    offset += p->value.size();
  }
}

Shape Value::shape() const { return tape_->node(*this).shape; }

std::span<const double> Value::data() const { return tape_->node(*this).val; }

double Value::scalar() const {
  const auto& n = tape_->node(*this);
  if (n.shape.size() != 1) fail(ErrorCode::ShapeMismatch, "scalar() on a non-scalar value");
  return n.val[0];
}

Value Tape::push(TapeNode node) {
  node.val.resize(static_cast<std::size_t>(node.shape.size()), 0.0);
  nodes_.push_back(std::move(node));
  return Value(this, static_cast<int>(nodes_.size() - 1));
}

Tape::TapeNode& Tape::node(Value v) { return nodes_[static_cast<std::size_t>(v.index_)]; }
const Tape::TapeNode& Tape::node(Value v) const { return nodes_[static_cast<std::size_t>(v.index_)]; }

void Tape::check_same_shape(const Value& a, const Value& b, const char* op) const {
  if (!(node(a).shape == node(b).shape))
    fail(ErrorCode::ShapeMismatch, std::string(op) + ": operand shapes differ");
}

Value Tape::param(Param& p) {
  TapeNode n{Op::Leaf, p.shape, {}, {}, -1, -1, 0, &p, {}, {}};
  Value v = push(std::move(n));
  node(v).val.assign(p.value.begin(), p.value.end());
  return v;
}

Value Tape::constant(Shape shape, std::span<const double> data) {
  if (!data.empty() && static_cast<int>(data.size()) != shape.size())
    fail(ErrorCode::ShapeMismatch, "constant: data length does not match shape");
  TapeNode n{Op::Constant, shape, {}, {}, -1, -1, 0, nullptr, {}, {}};
  Value v = push(std::move(n));
  if (!data.empty()) node(v).val.assign(data.begin(), data.end());
  return v;
}

Value Tape::matmul(Value a, Value b) {
  const Shape sa = node(a).shape, sb = node(b).shape;
  if (sa.cols != sb.rows)
    fail(ErrorCode::ShapeMismatch, "matmul: inner dimensions differ");
  TapeNode n{Op::MatMul, {sa.rows, sb.cols}, {}, {}, a.index(), b.index(), 0, nullptr, {}, {}};
  Value v = push(std::move(n));
  const auto& av = node(a).val;
  const auto& bv = node(b).val;
  auto& out = node(v).val;
  for (int i = 0; i < sa.rows; ++i) {
    for (int j = 0; j < sb.cols; ++j) {
      double acc = 0;
      for (int k = 0; k < sa.cols; ++k)
        acc += av[static_cast<std::size_t>(i) * sa.cols + k] *
               bv[static_cast<std::size_t>(k) * sb.cols + j];
      out[static_cast<std::size_t>(i) * sb.cols + j] = acc;
    }
  }
  return v;
}

Value Tape::add(Value a, Value b) {
  check_same_shape(a, b, "add");
  TapeNode n{Op::Add, node(a).shape, {}, {}, a.index(), b.index(), 0, nullptr, {}, {}};
  Value v = push(std::move(n));
  const auto& av = node(a).val;
  const auto& bv = node(b).val;
  auto& out = node(v).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return v;
}

Value Tape::elementwise_mul(Value a, Value b) {
  check_same_shape(a, b, "elementwise_mul");
  TapeNode n{Op::Mul, node(a).shape, {}, {}, a.index(), b.index(), 0, nullptr, {}, {}};
  Value v = push(std::move(n));
  const auto& av = node(a).val;
  const auto& bv = node(b).val;
  auto& out = node(v).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return v;
}

Value Tape::concat_rows(const std::vector<Value>& parts) {
  if (parts.empty()) fail(ErrorCode::InvalidArgument, "concat_rows: no inputs");
  const int cols = node(parts[0]).shape.cols;
  int rows = 0;
  for (const Value& part : parts) {
    if (node(part).shape.cols != cols)
      fail(ErrorCode::ShapeMismatch, "concat_rows: column counts differ");
    rows += node(part).shape.rows;
  }
  TapeNode n{Op::Concat, {rows, cols}, {}, {}, -1, -1, 0, nullptr, {}, {}};
  for (const Value& part : parts) n.ins.push_back(part.index());
  Value v = push(std::move(n));
  auto& out = node(v).val;
  std::size_t offset = 0;
  for (const Value& part : parts) {
    const auto& pv = node(part).val;
    std::copy(pv.begin(), pv.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += pv.size();
  }
  return v;
}

std::vector<Value> Tape::split_rows(Value x, int parts) {
  const Shape shape = node(x).shape;
  if (parts <= 0 || shape.rows % parts != 0)
    fail(ErrorCode::ShapeMismatch, "split_rows: parts must divide the row count");
  const int rows = shape.rows / parts;
  std::vector<Value> out;
  out.reserve(static_cast<std::size_t>(parts));
  for (int p = 0; p < parts; ++p) {
    TapeNode n{Op::Split, {rows, shape.cols}, {}, {}, x.index(), -1, p * rows * shape.cols,
               nullptr, {}, {}};
    Value v = push(std::move(n));
    const auto& xv = node(x).val;
    auto& pv = node(v).val;
    const std::size_t offset = static_cast<std::size_t>(p) * pv.size();
    std::copy(xv.begin() + static_cast<std::ptrdiff_t>(offset),
              xv.begin() + static_cast<std::ptrdiff_t>(offset + pv.size()), pv.begin());
    out.push_back(v);
  }
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Value Tape::sigmoid(Value x) {
  TapeNode n{Op::Sigmoid, node(x).shape, {}, {}, x.index(), -1, 0, nullptr, {}, {}};
  Value v = push(std::move(n));
  const auto& xv = node(x).val;
  auto& out = node(v).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(xv[i]);
  return v;
}

Value Tape::tanh(Value x) {
  TapeNode n{Op::Tanh, node(x).shape, {}, {}, x.index(), -1, 0, nullptr, {}, {}};
  Value v = push(std::move(n));
  const auto& xv = node(x).val;
  auto& out = node(v).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  return v;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> probs(logits.size());
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - peak);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

Value Tape::softmax_cross_entropy(Value logits, int oracle) {
  const Shape shape = node(logits).shape;
  if (shape.cols != 1 || shape.rows < 1)
    fail(ErrorCode::ShapeMismatch, "softmax_cross_entropy: logits must be a column vector");
  if (oracle < 0 || oracle >= shape.rows)
    fail(ErrorCode::InvalidArgument, "softmax_cross_entropy: oracle index out of range");
  TapeNode n{Op::SoftmaxXent, {1, 1}, {}, {}, logits.index(), -1, oracle, nullptr, {}, {}};
  Value v = push(std::move(n));
  const auto& lv = node(logits).val;
  const double peak = *std::max_element(lv.begin(), lv.end());
  double total = 0;
  for (double l : lv) total += std::exp(l - peak);
  const double log_sum = peak + std::log(total);
  node(v).val[0] = log_sum - lv[static_cast<std::size_t>(oracle)];
  auto& probs = node(v).extra;
  probs.resize(lv.size());
  for (std::size_t i = 0; i < lv.size(); ++i) probs[i] = std::exp(lv[i] - log_sum);
  return v;
}

Value Tape::embedding_lookup(Param& table, int id) {
  if (id < 0 || id >= table.shape.rows)
    fail(ErrorCode::InvalidArgument, "embedding_lookup: row index out of range");
  TapeNode n{Op::Embed, {table.shape.cols, 1}, {}, {}, -1, -1, id, &table, {}, {}};
  Value v = push(std::move(n));
  auto& out = node(v).val;
  const std::size_t offset = static_cast<std::size_t>(id) * static_cast<std::size_t>(table.shape.cols);
  std::copy(table.value.begin() + static_cast<std::ptrdiff_t>(offset),
            table.value.begin() + static_cast<std::ptrdiff_t>(offset + out.size()), out.begin());
  return v;
}

void Tape::backward(Value root) {
  TapeNode& top = node(root);
  if (top.shape.size() != 1)
    fail(ErrorCode::ShapeMismatch, "backward: root must be a scalar");
  for (TapeNode& n : nodes_) n.grad.assign(n.val.size(), 0.0);
  top.grad[0] = 1.0;

  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    TapeNode& n = nodes_[idx];
    switch (n.op) {
      case Op::Leaf: {
        for (std::size_t i = 0; i < n.grad.size(); ++i) n.param->grad[i] += n.grad[i];
        break;
      }
      case Op::Constant:
        break;
      case Op::MatMul: {
        TapeNode& a = nodes_[static_cast<std::size_t>(n.a)];
        TapeNode& b = nodes_[static_cast<std::size_t>(n.b)];
        const int m = a.shape.rows, k = a.shape.cols, c = b.shape.cols;
        // dA += dC * B^T ; dB += A^T * dC
        for (int i = 0; i < m; ++i)
          for (int kk = 0; kk < k; ++kk) {
            double acc = 0;
            for (int j = 0; j < c; ++j)
              acc += n.grad[static_cast<std::size_t>(i) * c + j] *
                     b.val[static_cast<std::size_t>(kk) * c + j];
            a.grad[static_cast<std::size_t>(i) * k + kk] += acc;
          }
        for (int kk = 0; kk < k; ++kk)
          for (int j = 0; j < c; ++j) {
            double acc = 0;
            for (int i = 0; i < m; ++i)
              acc += a.val[static_cast<std::size_t>(i) * k + kk] *
                     n.grad[static_cast<std::size_t>(i) * c + j];
            b.grad[static_cast<std::size_t>(kk) * c + j] += acc;
          }
        break;
      }
      case Op::Add: {
        TapeNode& a = nodes_[static_cast<std::size_t>(n.a)];
        TapeNode& b = nodes_[static_cast<std::size_t>(n.b)];
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          a.grad[i] += n.grad[i];
          b.grad[i] += n.grad[i];
        }
        break;
      }
      case Op::Mul: {
        TapeNode& a = nodes_[static_cast<std::size_t>(n.a)];
        TapeNode& b = nodes_[static_cast<std::size_t>(n.b)];
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          a.grad[i] += n.grad[i] * b.val[i];
          b.grad[i] += n.grad[i] * a.val[i];
        }
        break;
      }
      case Op::Concat: {
        std::size_t offset = 0;
        for (int in : n.ins) {
          TapeNode& part = nodes_[static_cast<std::size_t>(in)];
          for (std::size_t i = 0; i < part.grad.size(); ++i)
            part.grad[i] += n.grad[offset + i];
          offset += part.grad.size();
        }
        break;
      }
      case Op::Split: {
        TapeNode& x = nodes_[static_cast<std::size_t>(n.a)];
        const std::size_t offset = static_cast<std::size_t>(n.aux);
        for (std::size_t i = 0; i < n.grad.size(); ++i) x.grad[offset + i] += n.grad[i];
        break;
      }
      case Op::Sigmoid: {
        TapeNode& x = nodes_[static_cast<std::size_t>(n.a)];
        for (std::size_t i = 0; i < n.grad.size(); ++i)
          x.grad[i] += n.grad[i] * n.val[i] * (1.0 - n.val[i]);
        break;
      }
      case Op::Tanh: {
        TapeNode& x = nodes_[static_cast<std::size_t>(n.a)];
        for (std::size_t i = 0; i < n.grad.size(); ++i)
          x.grad[i] += n.grad[i] * (1.0 - n.val[i] * n.val[i]);
        break;
      }
      case Op::SoftmaxXent: {
        TapeNode& logits = nodes_[static_cast<std::size_t>(n.a)];
        const double g = n.grad[0];
        for (std::size_t i = 0; i < logits.grad.size(); ++i) {
          const double one_hot = (static_cast<int>(i) == n.aux) ? 1.0 : 0.0;
          logits.grad[i] += g * (n.extra[i] - one_hot);
        }
        break;
      }
      case Op::Embed: {
        const std::size_t offset =
            static_cast<std::size_t>(n.aux) * static_cast<std::size_t>(n.param->shape.cols);
        for (std::size_t i = 0; i < n.grad.size(); ++i) n.param->grad[offset + i] += n.grad[i];
        break;
      }
    }
  }
}

}  // namespace hlm

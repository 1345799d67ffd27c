#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hlm/error.hpp"

namespace hlm {

struct Shape {
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

// Named trainable array (row-major) with a gradient buffer of the same
// shape. Gradients accumulate additively until zero_grad().
struct Param {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;

  Param(std::string name_, int rows, int cols)
      : name(std::move(name_)),
        shape{rows, cols},
        value(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0),
        grad(value.size(), 0.0) {}

  double& at(int r, int c) { return value[static_cast<std::size_t>(r) * shape.cols + c]; }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

// Registry of every trainable array of a model, in declared order. The
// order is the checkpoint layout and the optimizer iteration order.
class ParamSet {
 public:
  Param& add(const std::string& name, int rows, int cols);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;

  std::size_t count() const { return params_.size(); }
  Param& operator[](std::size_t i) { return *params_[i]; }
  const Param& operator[](std::size_t i) const { return *params_[i]; }

  std::size_t total_size() const;
  void zero_grads();

  // Flat copies of all values in declared order; used for best-checkpoint
  // snapshots during training.
  std::vector<double> snapshot_values() const;
  void restore_values(const std::vector<double>& snapshot);

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Value {
 public:
  Value() = default;

  Shape shape() const;
  std::span<const double> data() const;
  double scalar() const;

  int index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Value(Tape* tape, int index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  int index_ = -1;
};

// Dynamic reverse-mode tape over dense double matrices. Rebuilt per
// example; ops record enough state to backpropagate. backward() seeds the
// scalar root with gradient 1 and scatters leaf gradients into the bound
// Param::grad buffers, accumulating across fan-out and repeated leases.
class Tape {
 public:
  // Leaf bound to a parameter; backward adds into p.grad.
  Value param(Param& p);
  // Constant leaf; zeros when data is empty.
  Value constant(Shape shape, std::span<const double> data = {});
  Value zeros(Shape shape) { return constant(shape); }

  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value elementwise_mul(Value a, Value b);
  Value concat_rows(const std::vector<Value>& parts);
  std::vector<Value> split_rows(Value x, int parts);
  Value sigmoid(Value x);
  Value tanh(Value x);
  // Scalar -log(softmax(logits)[oracle]); logits must be a column vector.
  Value softmax_cross_entropy(Value logits, int oracle);
  // Row `id` of a table parameter as a column vector; backward scatters
  // into that row only.
  Value embedding_lookup(Param& table, int id);

  void backward(Value root);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    Leaf,
    Constant,
    MatMul,
    Add,
    Mul,
    Concat,
    Split,
    Sigmoid,
    Tanh,
    SoftmaxXent,
    Embed,
  };

  struct TapeNode {
    Op op;
    Shape shape;
    std::vector<double> val;
    std::vector<double> grad;
    int a = -1;
    int b = -1;
    int aux = 0;                // oracle index / split offset / embedding row
    Param* param = nullptr;
    std::vector<int> ins;       // Concat only
    std::vector<double> extra;  // SoftmaxXent: cached probabilities
  };

  Value push(TapeNode node);
  TapeNode& node(Value v);
  const TapeNode& node(Value v) const;
  void check_same_shape(const Value& a, const Value& b, const char* op) const;

  friend class Value;
  std::vector<TapeNode> nodes_;
};

// Numerically stable softmax of a plain vector (forward only; used on the
// evaluation path where no gradients are needed).
std::vector<double> softmax(std::span<const double> logits);

double stable_sigmoid(double x);

}  // namespace hlm

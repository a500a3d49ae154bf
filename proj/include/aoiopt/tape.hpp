#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace aoiopt {

/// Row-major dense matrix. On the tape, rows index batch items and columns index features.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid as long as the tape is not cleared.
class Var {
 public:
  Var() = default;

  const Mat& value() const;
  /// Adjoint d(loss)/d(this) from the most recent backward pass.
  const Mat& grad() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode differentiation over matrix-valued primitives.
///
/// Nodes are appended in evaluation order, so the node list is already topologically
/// sorted and a single reverse sweep accumulates exact adjoints. Binary elementwise ops
/// broadcast a 1-row operand over the rows of the other operand. Subgradients at kinks
/// are zero: relu'(0) = 0 and sqrt'(0) = 0.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable input.
  Var leaf(Mat value);
  /// Non-differentiable input.
  Var constant(Mat value);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var scale(Var a, double c);
  Var shift(Var a, double c);
  Var matmul(Var a, Var b);

  Var square(Var a);
  Var sqrt(Var a);
  Var log(Var a);
  Var exp(Var a);
  Var relu(Var a);
  Var sigmoid(Var a);

  /// out[:, k] = a[:, cols[k]].
  Var select_cols(Var a, std::vector<Index> cols);
  /// out[:, g] = sum of a[:, k] over k with group[k] == g.
  Var group_sum_cols(Var a, std::vector<Index> group, Index n_groups);
  /// 1x1 sum of all entries.
  Var sum(Var a);
  /// rows x 1 per-row sums.
  Var row_sum(Var a);
  /// 1 x cols mean over rows.
  Var mean_rows(Var a);

  /// Accumulates adjoints of a 1x1 `loss` into every node that depends on a leaf.
  /// Throws StateError when the tape is empty or `loss` belongs to another tape.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  friend class Var;
  using Backprop = std::function<void(Tape&, std::size_t)>;

  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    Backprop backprop;
  };

  Var push(Mat value, bool needs_grad, Backprop backprop);
  Node& node(Var v);
  const Node& node(std::size_t id) const { return nodes_[id]; }
  void check(Var v) const;
  // Adds `g` into the adjoint of `v`, summing over rows if `v` was broadcast.
  void accumulate(Var v, const Mat& g);

  std::vector<Node> nodes_;
  bool has_grads_ = false;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator+(Var a, double c);
Var operator-(double c, Var a);

}  // namespace aoiopt

#include "aoiopt/tape.hpp"

#include <cmath>
#include <string>

#include "aoiopt/errors.hpp"

namespace aoiopt {

namespace {

Index broadcast_rows(const Mat& a, const Mat& b, const char* op) {
  const Index rows = std::max(a.rows(), b.rows());
  const bool ok = a.cols() == b.cols() && (a.rows() == rows || a.rows() == 1) &&
                  (b.rows() == rows || b.rows() == 1);
  if (!ok) {
    throw ArgumentError(std::string("incompatible shapes for ") + op + ": " +
                        std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  return rows;
}

Mat expand(const Mat& m, Index rows) {
  if (m.rows() == rows) return m;
  return m.replicate(rows, 1);
}

}  // namespace

const Mat& Var::value() const {
  if (!tape_) throw StateError("use of an unbound Var");
  return tape_->node(id_).value;
}

const Mat& Var::grad() const {
  if (!tape_) throw StateError("use of an unbound Var");
  if (!tape_->has_grads_) throw StateError("gradient requested before backward");
  return tape_->node(id_).grad;
}

double Var::scalar() const {
  const Mat& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ArgumentError("scalar() on a non-1x1 node");
  return v(0, 0);
}

Var Tape::push(Mat value, bool needs_grad, Backprop backprop) {
  nodes_.push_back(Node{std::move(value), Mat(), needs_grad, std::move(backprop)});
  has_grads_ = false;
  return Var(this, nodes_.size() - 1);
}

Tape::Node& Tape::node(Var v) {
  check(v);
  return nodes_[v.id_];
}

void Tape::check(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw StateError("Var does not belong to this tape");
}

void Tape::accumulate(Var v, const Mat& g) {
  Node& n = nodes_[v.id_];
  if (!n.needs_grad) return;
  if (n.value.rows() == 1 && g.rows() > 1) {
    n.grad += g.colwise().sum();
  } else {
    n.grad += g;
  }
}

Var Tape::leaf(Mat value) { return push(std::move(value), true, nullptr); }

Var Tape::constant(Mat value) { return push(std::move(value), false, nullptr); }

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  const Index rows = broadcast_rows(a.value(), b.value(), "add");
  Mat out = expand(a.value(), rows) + expand(b.value(), rows);
  return push(std::move(out), node(a).needs_grad || node(b).needs_grad,
              [a, b](Tape& t, std::size_t self) {
                const Mat& g = t.nodes_[self].grad;
                t.accumulate(a, g);
                t.accumulate(b, g);
              });
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  const Index rows = broadcast_rows(a.value(), b.value(), "sub");
  Mat out = expand(a.value(), rows) - expand(b.value(), rows);
  return push(std::move(out), node(a).needs_grad || node(b).needs_grad,
              [a, b](Tape& t, std::size_t self) {
                const Mat& g = t.nodes_[self].grad;
                t.accumulate(a, g);
                t.accumulate(b, -g);
              });
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  const Index rows = broadcast_rows(a.value(), b.value(), "mul");
  Mat out = expand(a.value(), rows).cwiseProduct(expand(b.value(), rows));
  return push(std::move(out), node(a).needs_grad || node(b).needs_grad,
              [a, b, rows](Tape& t, std::size_t self) {
                const Mat& g = t.nodes_[self].grad;
                if (t.nodes_[a.id_].needs_grad) {
                  t.accumulate(a, g.cwiseProduct(expand(t.nodes_[b.id_].value, rows)));
                }
                if (t.nodes_[b.id_].needs_grad) {
                  t.accumulate(b, g.cwiseProduct(expand(t.nodes_[a.id_].value, rows)));
                }
              });
}

Var Tape::div(Var a, Var b) {
  check(a);
  check(b);
  const Index rows = broadcast_rows(a.value(), b.value(), "div");
  Mat out = expand(a.value(), rows).cwiseQuotient(expand(b.value(), rows));
  return push(std::move(out), node(a).needs_grad || node(b).needs_grad,
              [a, b, rows](Tape& t, std::size_t self) {
                const Mat& g = t.nodes_[self].grad;
                const Mat bv = expand(t.nodes_[b.id_].value, rows);
                const Mat ga = g.cwiseQuotient(bv);
                t.accumulate(a, ga);
                if (t.nodes_[b.id_].needs_grad) {
                  // d(a/b)/db = -(a/b)/b
                  t.accumulate(b, -ga.cwiseProduct(t.nodes_[self].value));
                }
              });
}

Var Tape::scale(Var a, double c) {
  check(a);
  Mat out = c * a.value();
  return push(std::move(out), node(a).needs_grad, [a, c](Tape& t, std::size_t self) {
    t.accumulate(a, c * t.nodes_[self].grad);
  });
}

Var Tape::shift(Var a, double c) {
  check(a);
  Mat out = a.value().array() + c;
  return push(std::move(out), node(a).needs_grad, [a](Tape& t, std::size_t self) {
    t.accumulate(a, t.nodes_[self].grad);
  });
}

Var Tape::matmul(Var a, Var b) {
  check(a);
  check(b);
  if (a.cols() != b.rows()) {
    throw ArgumentError("matmul inner dimensions differ: " + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()));
  }
  Mat out = a.value() * b.value();
  return push(std::move(out), node(a).needs_grad || node(b).needs_grad,
              [a, b](Tape& t, std::size_t self) {
                const Mat& g = t.nodes_[self].grad;
                Node& na = t.nodes_[a.id_];
                Node& nb = t.nodes_[b.id_];
                if (na.needs_grad) na.grad.noalias() += g * nb.value.transpose();
                if (nb.needs_grad) nb.grad.noalias() += na.value.transpose() * g;
              });
}

Var Tape::square(Var a) {
  check(a);
  Mat out = a.value().array().square();
  return push(std::move(out), node(a).needs_grad, [a](Tape& t, std::size_t self) {
    t.accumulate(a, 2.0 * t.nodes_[self].grad.cwiseProduct(t.nodes_[a.id_].value));
  });
}

Var Tape::sqrt(Var a) {
  check(a);
  Mat out = a.value().array().sqrt();
  return push(std::move(out), node(a).needs_grad, [a](Tape& t, std::size_t self) {
    const Mat& y = t.nodes_[self].value;
    const Mat g = t.nodes_[self].grad.binaryExpr(
        y, [](double gi, double yi) { return yi > 0.0 ? gi / (2.0 * yi) : 0.0; });
    t.accumulate(a, g);
  });
}

Var Tape::log(Var a) {
  check(a);
  Mat out = a.value().array().log();
  return push(std::move(out), node(a).needs_grad, [a](Tape& t, std::size_t self) {
    t.accumulate(a, t.nodes_[self].grad.cwiseQuotient(t.nodes_[a.id_].value));
  });
}

Var Tape::exp(Var a) {
  check(a);
  Mat out = a.value().array().exp();
  return push(std::move(out), node(a).needs_grad, [a](Tape& t, std::size_t self) {
    t.accumulate(a, t.nodes_[self].grad.cwiseProduct(t.nodes_[self].value));
  });
}

Var Tape::relu(Var a) {
  check(a);
  Mat out = a.value().cwiseMax(0.0);
  return push(std::move(out), node(a).needs_grad, [a](Tape& t, std::size_t self) {
    const Mat g = t.nodes_[self].grad.binaryExpr(
        t.nodes_[a.id_].value, [](double gi, double xi) { return xi > 0.0 ? gi : 0.0; });
    t.accumulate(a, g);
  });
}

Var Tape::sigmoid(Var a) {
  check(a);
  Mat out = a.value().unaryExpr([](double x) {
    // Evaluated on the side that cannot overflow.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return push(std::move(out), node(a).needs_grad, [a](Tape& t, std::size_t self) {
    const Mat& y = t.nodes_[self].value;
    t.accumulate(a, t.nodes_[self].grad.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var Tape::select_cols(Var a, std::vector<Index> cols) {
  check(a);
  const Mat& av = a.value();
  Mat out(av.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] < 0 || cols[k] >= av.cols()) throw ArgumentError("select_cols index out of range");
    out.col(static_cast<Index>(k)) = av.col(cols[k]);
  }
  return push(std::move(out), node(a).needs_grad,
              [a, cols = std::move(cols)](Tape& t, std::size_t self) {
                Node& na = t.nodes_[a.id_];
                if (!na.needs_grad) return;
                const Mat& g = t.nodes_[self].grad;
                for (std::size_t k = 0; k < cols.size(); ++k) {
                  na.grad.col(cols[k]) += g.col(static_cast<Index>(k));
                }
              });
}

Var Tape::group_sum_cols(Var a, std::vector<Index> group, Index n_groups) {
  check(a);
  const Mat& av = a.value();
  if (static_cast<Index>(group.size()) != av.cols()) {
    throw ArgumentError("group_sum_cols needs one group id per column");
  }
  Mat out = Mat::Zero(av.rows(), n_groups);
  for (std::size_t k = 0; k < group.size(); ++k) {
    if (group[k] < 0 || group[k] >= n_groups) throw ArgumentError("group id out of range");
    out.col(group[k]) += av.col(static_cast<Index>(k));
  }
  return push(std::move(out), node(a).needs_grad,
              [a, group = std::move(group)](Tape& t, std::size_t self) {
                Node& na = t.nodes_[a.id_];
                if (!na.needs_grad) return;
                const Mat& g = t.nodes_[self].grad;
                for (std::size_t k = 0; k < group.size(); ++k) {
                  na.grad.col(static_cast<Index>(k)) += g.col(group[k]);
                }
              });
}

Var Tape::sum(Var a) {
  check(a);
  Mat out(1, 1);
  out(0, 0) = a.value().sum();
  return push(std::move(out), node(a).needs_grad, [a](Tape& t, std::size_t self) {
    Node& na = t.nodes_[a.id_];
    na.grad.array() += t.nodes_[self].grad(0, 0);
  });
}

Var Tape::row_sum(Var a) {
  check(a);
  Mat out = a.value().rowwise().sum();
  return push(std::move(out), node(a).needs_grad, [a](Tape& t, std::size_t self) {
    Node& na = t.nodes_[a.id_];
    na.grad.colwise() += t.nodes_[self].grad.col(0);
  });
}

Var Tape::mean_rows(Var a) {
  check(a);
  const double n = static_cast<double>(a.rows());
  Mat out = a.value().colwise().mean();
  return push(std::move(out), node(a).needs_grad, [a, n](Tape& t, std::size_t self) {
    Node& na = t.nodes_[a.id_];
    na.grad.rowwise() += t.nodes_[self].grad.row(0) / n;
  });
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw StateError("backward on an empty tape");
  check(loss);
  const Mat& lv = nodes_[loss.id_].value;
  if (lv.rows() != 1 || lv.cols() != 1) throw ArgumentError("backward needs a 1x1 loss node");
  for (auto& n : nodes_) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  nodes_[loss.id_].grad(0, 0) = 1.0;
  for (std::size_t k = loss.id_ + 1; k-- > 0;) {
    Node& n = nodes_[k];
    if (n.needs_grad && n.backprop) n.backprop(*this, k);
  }
  has_grads_ = true;
}

void Tape::clear() {
  nodes_.clear();
  has_grads_ = false;
}

namespace {
Tape& tape_of(Var v) {
  if (!v.valid()) throw StateError("use of an unbound Var");
  return *v.tape();
}
}  // namespace

Var operator+(Var a, Var b) { return tape_of(a).add(a, b); }
Var operator-(Var a, Var b) { return tape_of(a).sub(a, b); }
Var operator*(Var a, Var b) { return tape_of(a).mul(a, b); }
Var operator/(Var a, Var b) { return tape_of(a).div(a, b); }
Var operator*(Var a, double c) { return tape_of(a).scale(a, c); }
Var operator*(double c, Var a) { return tape_of(a).scale(a, c); }
Var operator+(Var a, double c) { return tape_of(a).shift(a, c); }
Var operator-(double c, Var a) { return tape_of(a).shift(tape_of(a).scale(a, -1.0), c); }

}  // namespace aoiopt

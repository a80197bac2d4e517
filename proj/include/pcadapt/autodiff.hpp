#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "pcadapt/discrepancy.hpp"
#include "pcadapt/matrix.hpp"

namespace pcadapt {

// Reverse-mode tape over matrices. Nodes are appended in evaluation order,
// so a single reverse sweep visits them in topological order and gradient
// accumulation happens in a fixed, reproducible order.
//
// Losses (cross-entropy, MMD^2, CORAL) are fused nodes with hand-derived
// backward rules; the rules are finite-difference checked in the test suite.
class Tape {
 public:
  using NodeId = std::size_t;

  NodeId input(Matrix value, bool requires_grad);

  NodeId matmul(NodeId a, NodeId b);
  // Broadcast-add a 1 x n bias row to every row of a.
  NodeId add_rowvec(NodeId a, NodeId bias);
  NodeId relu(NodeId a);
  // Column-wise max over each row range; one output row per segment. Ties
  // route the gradient to the first maximal row.
  NodeId segment_max(NodeId a, std::vector<std::pair<std::size_t, std::size_t>> segments);
  // Mean over the batch of -log softmax(logits)[label]; scalar node.
  NodeId softmax_cross_entropy(NodeId logits, std::vector<int> labels);
  NodeId mk_mmd2(NodeId x, NodeId y, KernelFamily family);
  NodeId coral(NodeId x, NodeId y);
  // Scalar node sum_i coeff_i * value(term_i); every term must be scalar.
  NodeId weighted_sum(std::vector<std::pair<double, NodeId>> terms);
  // 0.5 * sum of squared entries; scalar node.
  NodeId half_frob_sq(NodeId a);

  const Matrix& value(NodeId id) const { return nodes_[id].value; }
  // Zero until backward() has run. For inputs created with
  // requires_grad = false this stays a zero matrix.
  const Matrix& grad(NodeId id) const { return nodes_[id].grad; }
  double scalar(NodeId id) const { return nodes_[id].value(0, 0); }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. The loss must
  // be a finite scalar.
  void backward(NodeId loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&)> back;
  };

  NodeId push(Matrix value, bool requires_grad, std::function<void(Tape&)> back);
  Matrix& grad_ref(NodeId id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

}  // namespace pcadapt

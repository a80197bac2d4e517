#include "pcadapt/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "pcadapt/error.hpp"

namespace pcadapt {

Tape::NodeId Tape::push(Matrix value, bool requires_grad, std::function<void(Tape&)> back) {
  Node node;
  node.grad = Matrix(value.rows, value.cols);
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

Tape::NodeId Tape::input(Matrix value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  Matrix out = pcadapt::matmul(value(a), value(b));
  const bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
  NodeId id = push(std::move(out), rg, nullptr);
  nodes_[id].back = [a, b, id](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    if (t.nodes_[a].requires_grad) {
      Matrix da = matmul_nt(g, t.nodes_[b].value);
      Matrix& ga = t.grad_ref(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += da.data[i];
    }
    if (t.nodes_[b].requires_grad) {
      Matrix db = matmul_tn(t.nodes_[a].value, g);
      Matrix& gb = t.grad_ref(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb.data[i] += db.data[i];
    }
  };
  return id;
}

Tape::NodeId Tape::add_rowvec(NodeId a, NodeId bias) {
  const Matrix& x = value(a);
  const Matrix& b = value(bias);
  if (b.rows != 1 || b.cols != x.cols)
    fail(Errc::shape_mismatch, "add_rowvec: bias must be 1 x " + std::to_string(x.cols));
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows; ++i) {
    double* row = out.row(i);
    for (std::size_t j = 0; j < out.cols; ++j) row[j] += b(0, j);
  }
  const bool rg = nodes_[a].requires_grad || nodes_[bias].requires_grad;
  NodeId id = push(std::move(out), rg, nullptr);
  nodes_[id].back = [a, bias, id](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    if (t.nodes_[a].requires_grad) {
      Matrix& ga = t.grad_ref(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += g.data[i];
    }
    if (t.nodes_[bias].requires_grad) {
      Matrix& gb = t.grad_ref(bias);
      for (std::size_t i = 0; i < g.rows; ++i) {
        const double* row = g.row(i);
        for (std::size_t j = 0; j < g.cols; ++j) gb(0, j) += row[j];
      }
    }
  };
  return id;
}

Tape::NodeId Tape::relu(NodeId a) {
  Matrix out = value(a);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  NodeId id = push(std::move(out), nodes_[a].requires_grad, nullptr);
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.nodes_[a].requires_grad) return;
    const Matrix& g = t.nodes_[id].grad;
    const Matrix& x = t.nodes_[a].value;
    Matrix& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (x.data[i] > 0.0) ga.data[i] += g.data[i];
  };
  return id;
}

Tape::NodeId Tape::segment_max(NodeId a, std::vector<std::pair<std::size_t, std::size_t>> segments) {
  const Matrix& x = value(a);
  Matrix out(segments.size(), x.cols);
  auto argmax = std::make_shared<std::vector<std::size_t>>(segments.size() * x.cols);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto [lo, hi] = segments[s];
    if (lo >= hi || hi > x.rows)
      fail(Errc::empty_cloud, "segment_max: segment " + std::to_string(s) + " is empty or out of range");
    for (std::size_t j = 0; j < x.cols; ++j) {
      std::size_t best = lo;
      double best_v = x(lo, j);
      for (std::size_t i = lo + 1; i < hi; ++i)
        if (x(i, j) > best_v) {  // strict: first maximal row wins
          best_v = x(i, j);
          best = i;
        }
      out(s, j) = best_v;
      (*argmax)[s * x.cols + j] = best;
    }
  }
  NodeId id = push(std::move(out), nodes_[a].requires_grad, nullptr);
  nodes_[id].back = [a, id, argmax](Tape& t) {
    if (!t.nodes_[a].requires_grad) return;
    const Matrix& g = t.nodes_[id].grad;
    Matrix& ga = t.grad_ref(a);
    for (std::size_t s = 0; s < g.rows; ++s)
      for (std::size_t j = 0; j < g.cols; ++j) ga((*argmax)[s * g.cols + j], j) += g(s, j);
  };
  return id;
}

namespace {

// Stabilized softmax cross-entropy; fills probs (same shape as logits) and
// returns the batch-mean negative log-likelihood.
double softmax_ce_forward(const Matrix& logits, const std::vector<int>& labels, Matrix& probs) {
  if (labels.size() != logits.rows)
    fail(Errc::shape_mismatch, "cross_entropy: one label per logit row required");
  probs = Matrix(logits.rows, logits.cols);
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= logits.cols)
      fail(Errc::label_out_of_range,
           "label " + std::to_string(label) + " outside 0.." + std::to_string(logits.cols - 1));
    const double* row = logits.row(i);
    double mx = row[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) denom += std::exp(row[j] - mx);
    const double log_denom = std::log(denom);
    for (std::size_t j = 0; j < logits.cols; ++j)
      probs(i, j) = std::exp(row[j] - mx) / denom;
    loss += log_denom - (row[label] - mx);
  }
  return loss / static_cast<double>(logits.rows);
}

}  // namespace

Tape::NodeId Tape::softmax_cross_entropy(NodeId logits, std::vector<int> labels) {
  auto probs = std::make_shared<Matrix>();
  Matrix out(1, 1);
  out(0, 0) = softmax_ce_forward(value(logits), labels, *probs);
  NodeId id = push(std::move(out), nodes_[logits].requires_grad, nullptr);
  auto labels_ptr = std::make_shared<std::vector<int>>(std::move(labels));
  nodes_[id].back = [logits, id, probs, labels_ptr](Tape& t) {
    if (!t.nodes_[logits].requires_grad) return;
    const double upstream = t.nodes_[id].grad(0, 0);
    Matrix& gl = t.grad_ref(logits);
    const double inv_batch = 1.0 / static_cast<double>(probs->rows);
    for (std::size_t i = 0; i < probs->rows; ++i)
      for (std::size_t j = 0; j < probs->cols; ++j) {
        double v = (*probs)(i, j);
        if (static_cast<std::size_t>((*labels_ptr)[i]) == j) v -= 1.0;
        gl(i, j) += upstream * inv_batch * v;
      }
  };
  return id;
}

Tape::NodeId Tape::mk_mmd2(NodeId x, NodeId y, KernelFamily family) {
  Matrix out(1, 1);
  out(0, 0) = pcadapt::mk_mmd2(value(x), value(y), family);
  const bool rg = nodes_[x].requires_grad || nodes_[y].requires_grad;
  NodeId id = push(std::move(out), rg, nullptr);
  auto fam = std::make_shared<KernelFamily>(std::move(family));
  nodes_[id].back = [x, y, id, fam](Tape& t) {
    const double upstream = t.nodes_[id].grad(0, 0);
    mk_mmd2_backward(t.nodes_[x].value, t.nodes_[y].value, *fam, upstream, t.grad_ref(x),
                     t.grad_ref(y));
  };
  return id;
}

Tape::NodeId Tape::coral(NodeId x, NodeId y) {
  Matrix out(1, 1);
  out(0, 0) = pcadapt::coral(value(x), value(y));
  const bool rg = nodes_[x].requires_grad || nodes_[y].requires_grad;
  NodeId id = push(std::move(out), rg, nullptr);
  nodes_[id].back = [x, y, id](Tape& t) {
    const double upstream = t.nodes_[id].grad(0, 0);
    coral_backward(t.nodes_[x].value, t.nodes_[y].value, upstream, t.grad_ref(x), t.grad_ref(y));
  };
  return id;
}

Tape::NodeId Tape::weighted_sum(std::vector<std::pair<double, NodeId>> terms) {
  Matrix out(1, 1);
  bool rg = false;
  for (const auto& [coeff, term] : terms) {
    const Matrix& v = value(term);
    if (v.rows != 1 || v.cols != 1) fail(Errc::shape_mismatch, "weighted_sum: terms must be scalar");
    out(0, 0) += coeff * v(0, 0);
    rg = rg || nodes_[term].requires_grad;
  }
  NodeId id = push(std::move(out), rg, nullptr);
  auto terms_ptr = std::make_shared<std::vector<std::pair<double, NodeId>>>(std::move(terms));
  nodes_[id].back = [id, terms_ptr](Tape& t) {
    const double upstream = t.nodes_[id].grad(0, 0);
    for (const auto& [coeff, term] : *terms_ptr)
      if (t.nodes_[term].requires_grad) t.grad_ref(term)(0, 0) += upstream * coeff;
  };
  return id;
}

Tape::NodeId Tape::half_frob_sq(NodeId a) {
  Matrix out(1, 1);
  double acc = 0.0;
  for (double v : value(a).data) acc += v * v;
  out(0, 0) = 0.5 * acc;
  NodeId id = push(std::move(out), nodes_[a].requires_grad, nullptr);
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.nodes_[a].requires_grad) return;
    const double upstream = t.nodes_[id].grad(0, 0);
    const Matrix& x = t.nodes_[a].value;
    Matrix& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += upstream * x.data[i];
  };
  return id;
}

void Tape::backward(NodeId loss) {
  const Matrix& v = value(loss);
  if (v.rows != 1 || v.cols != 1) fail(Errc::shape_mismatch, "backward: loss must be scalar");
  if (!std::isfinite(v(0, 0)))
    fail(Errc::non_finite_loss, "loss is " + std::to_string(v(0, 0)));
  for (auto& node : nodes_)
    std::fill(node.grad.data.begin(), node.grad.data.end(), 0.0);
  grad_ref(loss)(0, 0) = 1.0;
  for (std::size_t i = loss + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.requires_grad && node.back) node.back(*this);
  }
}

}  // namespace pcadapt

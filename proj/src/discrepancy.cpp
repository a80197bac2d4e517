#include "pcadapt/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcadapt/error.hpp"

namespace pcadapt {

void KernelFamily::validate() const {
  if (bandwidths.empty() || bandwidths.size() != weights.size())
    fail(Errc::invalid_argument, "kernel family needs matching, non-empty bandwidths/weights");
  double sum = 0.0;
  for (std::size_t u = 0; u < size(); ++u) {
    if (!(bandwidths[u] > 0.0)) fail(Errc::invalid_argument, "kernel bandwidth must be positive");
    if (weights[u] < 0.0) fail(Errc::invalid_argument, "kernel weight must be non-negative");
    sum += weights[u];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    fail(Errc::invalid_argument, "kernel weights must sum to 1, got " + std::to_string(sum));
}

KernelFamily default_family(double base_sigma, std::size_t count, double spacing) {
  if (!(base_sigma > 0.0)) fail(Errc::invalid_argument, "base sigma must be positive");
  if (count == 0) fail(Errc::invalid_argument, "kernel count must be positive");
  if (!(spacing > 0.0)) fail(Errc::invalid_argument, "kernel spacing must be positive");
  KernelFamily family;
  const double mid = (static_cast<double>(count) - 1.0) / 2.0;
  for (std::size_t u = 0; u < count; ++u) {
    family.bandwidths.push_back(base_sigma * std::pow(spacing, static_cast<double>(u) - mid));
    family.weights.push_back(1.0 / static_cast<double>(count));
  }
  return family;
}

namespace {

void require_same_dim(const Matrix& x, const Matrix& y, const char* who) {
  if (x.cols != y.cols)
    fail(Errc::dimension_mismatch, std::string(who) + ": feature dimensions differ (" +
                                       std::to_string(x.cols) + " vs " + std::to_string(y.cols) +
                                       ")");
}

void require_batch(const Matrix& x, const char* who) {
  if (x.rows < 2)
    fail(Errc::batch_too_small, std::string(who) + ": needs at least 2 rows, got " +
                                    std::to_string(x.rows));
}

double row_sq_distance(const double* a, const double* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

double mean_all(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.data) acc += v;
  return acc / static_cast<double>(m.size());
}

}  // namespace

Matrix squared_distances(const Matrix& x, const Matrix& y) {
  require_same_dim(x, y, "squared_distances");
  Matrix d2(x.rows, y.rows);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < y.rows; ++j) d2(i, j) = row_sq_distance(x.row(i), y.row(j), x.cols);
  return d2;
}

Matrix gaussian_gram(const Matrix& x, const Matrix& y, double sigma) {
  if (!(sigma > 0.0)) fail(Errc::invalid_argument, "gaussian_gram: sigma must be positive");
  require_same_dim(x, y, "gaussian_gram");
  Matrix g = squared_distances(x, y);
  const double inv = -1.0 / (2.0 * sigma * sigma);
  for (double& v : g.data) v = std::exp(v * inv);
  return g;
}

double median_bandwidth(const Matrix& x, const Matrix& y) {
  require_same_dim(x, y, "median_bandwidth");
  const std::size_t n = x.rows + y.rows;
  if (n < 2) fail(Errc::batch_too_small, "median_bandwidth: pooled batch needs >= 2 rows");
  auto row_of = [&](std::size_t i) { return i < x.rows ? x.row(i) : y.row(i - x.rows); };
  std::vector<double> d2;
  d2.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d2.push_back(row_sq_distance(row_of(i), row_of(j), x.cols));
  std::sort(d2.begin(), d2.end());
  const std::size_t m = d2.size();
  const double median = (m % 2 == 1) ? d2[m / 2] : 0.5 * (d2[m / 2 - 1] + d2[m / 2]);
  if (!(median > 0.0)) return 1.0;
  return std::sqrt(median);
}

double mk_mmd2(const Matrix& xs, const Matrix& xt, const KernelFamily& family) {
  family.validate();
  require_same_dim(xs, xt, "mk_mmd2");
  require_batch(xs, "mk_mmd2(source)");
  require_batch(xt, "mk_mmd2(target)");
  const Matrix d2_ss = squared_distances(xs, xs);
  const Matrix d2_st = squared_distances(xs, xt);
  const Matrix d2_tt = squared_distances(xt, xt);
  double value = 0.0;
  for (std::size_t u = 0; u < family.size(); ++u) {
    const double inv = -1.0 / (2.0 * family.bandwidths[u] * family.bandwidths[u]);
    auto mean_exp = [&](const Matrix& d2) {
      double acc = 0.0;
      for (double v : d2.data) acc += std::exp(v * inv);
      return acc / static_cast<double>(d2.size());
    };
    // Per-kernel combination first: identical batches give an exact zero.
    value += family.weights[u] * (mean_exp(d2_ss) - 2.0 * mean_exp(d2_st) + mean_exp(d2_tt));
  }
  return value;
}

Matrix covariance(const Matrix& x) {
  require_batch(x, "covariance");
  Matrix centered = x;
  for (std::size_t j = 0; j < x.cols; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) mean += x(i, j);
    mean /= static_cast<double>(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) centered(i, j) -= mean;
  }
  Matrix c = matmul_tn(centered, centered);
  const double inv = 1.0 / static_cast<double>(x.rows - 1);
  for (double& v : c.data) v *= inv;
  return c;
}

double coral(const Matrix& xs, const Matrix& xt) {
  require_same_dim(xs, xt, "coral");
  require_batch(xs, "coral(source)");
  require_batch(xt, "coral(target)");
  const Matrix cs = covariance(xs);
  const Matrix ct = covariance(xt);
  double frob = 0.0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const double diff = cs.data[i] - ct.data[i];
    frob += diff * diff;
  }
  const double d = static_cast<double>(xs.cols);
  return frob / (4.0 * d * d);
}

void mk_mmd2_backward(const Matrix& xs, const Matrix& xt, const KernelFamily& family,
                      double upstream, Matrix& grad_xs, Matrix& grad_xt) {
  const std::size_t ns = xs.rows, nt = xt.rows, d = xs.cols;
  // Kernel-weighted pair weights W[i,j] = sum_u (beta_u / sigma_u^2) K_u[i,j];
  // the gradient of each statistic is then a weighted sum of row differences.
  auto pair_weights = [&](const Matrix& a, const Matrix& b) {
    Matrix w = squared_distances(a, b);
    Matrix out(w.rows, w.cols);
    for (std::size_t u = 0; u < family.size(); ++u) {
      const double s2 = family.bandwidths[u] * family.bandwidths[u];
      const double coeff = family.weights[u] / s2;
      for (std::size_t i = 0; i < w.size(); ++i)
        out.data[i] += coeff * std::exp(-w.data[i] / (2.0 * s2));
    }
    return out;
  };
  const Matrix w_ss = pair_weights(xs, xs);
  const Matrix w_st = pair_weights(xs, xt);
  const Matrix w_tt = pair_weights(xt, xt);

  const double c_ss = upstream * 2.0 / (static_cast<double>(ns) * static_cast<double>(ns));
  const double c_tt = upstream * 2.0 / (static_cast<double>(nt) * static_cast<double>(nt));
  const double c_st = upstream * 2.0 / (static_cast<double>(ns) * static_cast<double>(nt));

  for (std::size_t i = 0; i < ns; ++i) {
    double* g = grad_xs.row(i);
    const double* xi = xs.row(i);
    for (std::size_t j = 0; j < ns; ++j) {
      const double w = c_ss * w_ss(i, j);
      const double* xj = xs.row(j);
      for (std::size_t k = 0; k < d; ++k) g[k] += w * (xj[k] - xi[k]);
    }
    for (std::size_t j = 0; j < nt; ++j) {
      const double w = c_st * w_st(i, j);
      const double* yj = xt.row(j);
      for (std::size_t k = 0; k < d; ++k) g[k] -= w * (yj[k] - xi[k]);
    }
  }
  for (std::size_t j = 0; j < nt; ++j) {
    double* g = grad_xt.row(j);
    const double* yj = xt.row(j);
    for (std::size_t i = 0; i < nt; ++i) {
      const double w = c_tt * w_tt(j, i);
      const double* yi = xt.row(i);
      for (std::size_t k = 0; k < d; ++k) g[k] += w * (yi[k] - yj[k]);
    }
    for (std::size_t i = 0; i < ns; ++i) {
      const double w = c_st * w_st(i, j);
      const double* xi = xs.row(i);
      for (std::size_t k = 0; k < d; ++k) g[k] -= w * (xi[k] - yj[k]);
    }
  }
}

void coral_backward(const Matrix& xs, const Matrix& xt, double upstream, Matrix& grad_xs,
                    Matrix& grad_xt) {
  const double d = static_cast<double>(xs.cols);
  const Matrix cs = covariance(xs);
  const Matrix ct = covariance(xt);
  Matrix delta(cs.rows, cs.cols);  // dL/dC_s = (C_s - C_t) / (2 d^2)
  for (std::size_t i = 0; i < cs.size(); ++i)
    delta.data[i] = (cs.data[i] - ct.data[i]) / (2.0 * d * d);

  auto accumulate = [&](const Matrix& x, Matrix& grad, double sign) {
    Matrix centered = x;
    for (std::size_t j = 0; j < x.cols; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < x.rows; ++i) mean += x(i, j);
      mean /= static_cast<double>(x.rows);
      for (std::size_t i = 0; i < x.rows; ++i) centered(i, j) -= mean;
    }
    // dL/dXc = 2 Xc delta / (n-1); centering projects out the column mean.
    Matrix g = matmul(centered, delta);
    const double coeff = sign * upstream * 2.0 / static_cast<double>(x.rows - 1);
    for (double& v : g.data) v *= coeff;
    for (std::size_t j = 0; j < g.cols; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < g.rows; ++i) mean += g(i, j);
      mean /= static_cast<double>(g.rows);
      for (std::size_t i = 0; i < g.rows; ++i) grad(i, j) += g(i, j) - mean;
    }
  };
  accumulate(xs, grad_xs, 1.0);
  accumulate(xt, grad_xt, -1.0);
}

}  // namespace pcadapt

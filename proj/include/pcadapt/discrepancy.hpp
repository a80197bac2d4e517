#pragma once

#include <cstddef>
#include <vector>

#include "pcadapt/matrix.hpp"

namespace pcadapt {

// Convex combination of Gaussian kernels: weights are non-negative and sum
// to one, bandwidths are positive.
struct KernelFamily {
  std::vector<double> bandwidths;
  std::vector<double> weights;

  std::size_t size() const { return bandwidths.size(); }
  void validate() const;
};

// b kernels geometrically spaced around base_sigma (spacing 2 gives
// sigma/4, sigma/2, sigma, 2*sigma, 4*sigma for b = 5), equal weights.
KernelFamily default_family(double base_sigma, std::size_t count = 5, double spacing = 2.0);

enum class Domain { source, target };

// A batch of activation row-vectors from one domain.
struct FeatureBatch {
  Matrix rows;
  Domain domain = Domain::source;
};

// Squared Euclidean distances between the rows of x and y.
Matrix squared_distances(const Matrix& x, const Matrix& y);

// Entry (i,j) = exp(-|x_i - y_j|^2 / (2 sigma^2)).
Matrix gaussian_gram(const Matrix& x, const Matrix& y, double sigma);

// Median heuristic: sigma^2 = median squared pairwise distance over the
// pooled rows of x and y (self-pairs excluded). Returns sigma, or 1 when the
// median is zero.
double median_bandwidth(const Matrix& x, const Matrix& y);

// Biased (V-statistic) squared multi-kernel MMD:
// mean(K_ss) - 2 mean(K_st) + mean(K_tt) under the family's convex
// combination kernel. Exactly zero for identical batches.
double mk_mmd2(const Matrix& xs, const Matrix& xt, const KernelFamily& family);

// Correlation alignment: |C_s - C_t|_F^2 / (4 d^2), covariances with
// mean-centering and 1/(n-1).
double coral(const Matrix& xs, const Matrix& xt);

// Column-mean-centered covariance, 1/(n-1).
Matrix covariance(const Matrix& x);

// Analytic input gradients for the two statistics; accumulated into
// grad_xs / grad_xt scaled by `upstream`. Finite-difference checked.
void mk_mmd2_backward(const Matrix& xs, const Matrix& xt, const KernelFamily& family,
                      double upstream, Matrix& grad_xs, Matrix& grad_xt);
void coral_backward(const Matrix& xs, const Matrix& xt, double upstream, Matrix& grad_xs,
                    Matrix& grad_xt);

}  // namespace pcadapt

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pcadapt {

// Dense row-major matrix of doubles. All kernels keep a fixed per-entry
// summation order, so results are reproducible and independent of how work
// is split across threads.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  std::size_t size() const { return data.size(); }
};

// Global cap on worker threads for the matmul kernels. Defaults to the
// hardware concurrency, overridable via the PCADAPT_THREADS environment
// variable or this setter. 1 disables threading.
void set_max_threads(unsigned n);
unsigned max_threads();

Matrix matmul(const Matrix& a, const Matrix& b);     // a(m,k) * b(k,n)
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a(m,k) * b(n,k)^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a(m,k)^T * b(m,n)

Matrix transpose(const Matrix& a);

// Run fn(begin, end) over [0, count) split into contiguous chunks, one chunk
// per worker. fn must only write rows in its own range.
void parallel_rows(std::size_t count, std::size_t work_per_row,
                   const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace pcadapt

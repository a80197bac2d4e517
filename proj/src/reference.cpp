#include "pcadapt/reference.hpp"

#include <cmath>

namespace pcadapt::reference {

double gaussian_kernel(const double* a, const double* b, std::size_t d, double sigma) {
  double sq = 0.0;
  for (std::size_t k = 0; k < d; ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
  return std::exp(-sq / (2.0 * sigma * sigma));
}

namespace {

double multi_kernel(const double* a, const double* b, std::size_t d, const KernelFamily& family) {
  double k = 0.0;
  for (std::size_t u = 0; u < family.size(); ++u)
    k += family.weights[u] * gaussian_kernel(a, b, d, family.bandwidths[u]);
  return k;
}

}  // namespace

double mk_mmd2(const Matrix& xs, const Matrix& xt, const KernelFamily& family) {
  const std::size_t ns = xs.rows, nt = xt.rows, d = xs.cols;
  double ss = 0.0, st = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < ns; ++j) ss += multi_kernel(xs.row(i), xs.row(j), d, family);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) st += multi_kernel(xs.row(i), xt.row(j), d, family);
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < nt; ++j) tt += multi_kernel(xt.row(i), xt.row(j), d, family);
  return ss / double(ns * ns) - 2.0 * st / double(ns * nt) + tt / double(nt * nt);
}

double coral(const Matrix& xs, const Matrix& xt) {
  const std::size_t d = xs.cols;
  auto cov_entry = [](const Matrix& x, std::size_t p, std::size_t q) {
    double mp = 0.0, mq = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      mp += x(i, p);
      mq += x(i, q);
    }
    mp /= double(x.rows);
    mq /= double(x.rows);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) acc += (x(i, p) - mp) * (x(i, q) - mq);
    return acc / double(x.rows - 1);
  };
  double frob = 0.0;
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < d; ++q) {
      const double diff = cov_entry(xs, p, q) - cov_entry(xt, p, q);
      frob += diff * diff;
    }
  return frob / (4.0 * double(d) * double(d));
}

}  // namespace pcadapt::reference

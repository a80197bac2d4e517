#include "pcadapt/matrix.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include "pcadapt/error.hpp"

namespace pcadapt {

namespace {

unsigned detect_threads() {
  if (const char* env = std::getenv("PCADAPT_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<unsigned> g_max_threads{0};  // 0 = not initialized yet

// Below this many multiply-adds threading is pure overhead.
constexpr std::size_t kParallelThreshold = 1u << 21;

}  // namespace

void set_max_threads(unsigned n) { g_max_threads.store(n == 0 ? 1 : n); }

unsigned max_threads() {
  unsigned v = g_max_threads.load();
  if (v == 0) {
    v = detect_threads();
    g_max_threads.store(v);
  }
  return v;
}

void parallel_rows(std::size_t count, std::size_t work_per_row,
                   const std::function<void(std::size_t, std::size_t)>& fn) {
  const unsigned want = max_threads();
  if (want <= 1 || count < 2 || count * work_per_row < kParallelThreshold) {
    fn(0, count);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(want, count);
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) fail(Errc::shape_mismatch, "matmul: inner dimensions differ");
  Matrix c(a.rows, b.cols);
  parallel_rows(a.rows, a.cols * b.cols, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double* ci = c.row(i);
      const double* ai = a.row(i);
      for (std::size_t k = 0; k < a.cols; ++k) {
        const double aik = ai[k];
        const double* bk = b.row(k);
        for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
      }
    }
  });
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) fail(Errc::shape_mismatch, "matmul_nt: inner dimensions differ");
  Matrix c(a.rows, b.rows);
  parallel_rows(a.rows, a.cols * b.rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double* ci = c.row(i);
      const double* ai = a.row(i);
      for (std::size_t j = 0; j < b.rows; ++j) {
        const double* bj = b.row(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < a.cols; ++k) acc += ai[k] * bj[k];
        ci[j] = acc;
      }
    }
  });
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) fail(Errc::shape_mismatch, "matmul_tn: inner dimensions differ");
  Matrix c(a.cols, b.cols);
  parallel_rows(a.cols, a.rows * b.cols, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      double* cp = c.row(p);
      for (std::size_t i = 0; i < a.rows; ++i) {
        const double aip = a(i, p);
        const double* bi = b.row(i);
        for (std::size_t j = 0; j < b.cols; ++j) cp[j] += aip * bi[j];
      }
    }
  });
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

}  // namespace pcadapt

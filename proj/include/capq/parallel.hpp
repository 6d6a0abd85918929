#pragma once

#include <cstdint>
#include <cstdlib>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

// Data-parallel loop and reduction kernels. Every kernel has an OpenMP
// variant and a serial reference variant; the dispatching wrappers pick the
// OpenMP one unless CAPQ_SERIAL=1 is set. Reductions are blocked so the
// summation order is identical in both variants (bitwise-reproducible
// results regardless of thread count).

namespace capq::par {

inline bool serial_forced() {
  static const bool v = [] {
    const char* e = std::getenv("CAPQ_SERIAL");
    return e && e[0] == '1';
  }();
  return v;
}

inline int workers() {
#ifdef _OPENMP
  return serial_forced() ? 1 : omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_workers(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

namespace serial {

template <class F>
void for_range(std::int64_t n, F&& f) {
  for (std::int64_t i = 0; i < n; ++i) f(i);
}

// Fixed-block partial sums; combined left to right.
inline double sum_blocked(std::span<const double> a) {
  constexpr std::int64_t B = 4096;
  const std::int64_t n = (std::int64_t)a.size();
  double total = 0.0;
  for (std::int64_t b = 0; b < n; b += B) {
    double s = 0.0;
    const std::int64_t e = b + B < n ? b + B : n;
    for (std::int64_t i = b; i < e; ++i) s += a[i];
    total += s;
  }
  return total;
}

inline double dot_blocked(std::span<const double> a, std::span<const double> b) {
  constexpr std::int64_t B = 4096;
  const std::int64_t n = (std::int64_t)a.size();
  double total = 0.0;
  for (std::int64_t blk = 0; blk < n; blk += B) {
    double s = 0.0;
    const std::int64_t e = blk + B < n ? blk + B : n;
    for (std::int64_t i = blk; i < e; ++i) s += a[i] * b[i];
    total += s;
  }
  return total;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) {
    double w = v < 0 ? -v : v;
    if (w > m) m = w;
  }
  return m;
}

}  // namespace serial

namespace omp {

template <class F>
void for_range(std::int64_t n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) f(i);
#else
  serial::for_range(n, f);
#endif
}

inline double sum_blocked(std::span<const double> a) {
  constexpr std::int64_t B = 4096;
  const std::int64_t n = (std::int64_t)a.size();
  const std::int64_t nb = (n + B - 1) / B;
  std::vector<double> partial((std::size_t)nb, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t b = 0; b < nb; ++b) {
    double s = 0.0;
    const std::int64_t lo = b * B, hi = lo + B < n ? lo + B : n;
    for (std::int64_t i = lo; i < hi; ++i) s += a[i];
    partial[(std::size_t)b] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

inline double dot_blocked(std::span<const double> a, std::span<const double> b) {
  constexpr std::int64_t B = 4096;
  const std::int64_t n = (std::int64_t)a.size();
  const std::int64_t nb = (n + B - 1) / B;
  std::vector<double> partial((std::size_t)nb, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t blk = 0; blk < nb; ++blk) {
    double s = 0.0;
    const std::int64_t lo = blk * B, hi = lo + B < n ? lo + B : n;
    for (std::int64_t i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[(std::size_t)blk] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

inline double max_abs(std::span<const double> a) {
  const std::int64_t n = (std::int64_t)a.size();
  double m = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(max : m) schedule(static)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    double w = a[i] < 0 ? -a[i] : a[i];
    if (w > m) m = w;
  }
  return m;
}

}  // namespace omp

template <class F>
void for_range(std::int64_t n, F&& f) {
  if (serial_forced())
    serial::for_range(n, f);
  else
    omp::for_range(n, f);
}

inline double sum(std::span<const double> a) {
  return serial_forced() ? serial::sum_blocked(a) : omp::sum_blocked(a);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return serial_forced() ? serial::dot_blocked(a, b) : omp::dot_blocked(a, b);
}

inline double max_abs(std::span<const double> a) {
  return serial_forced() ? serial::max_abs(a) : omp::max_abs(a);
}

}  // namespace capq::par

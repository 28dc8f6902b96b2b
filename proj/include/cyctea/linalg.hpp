#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cyctea/common.hpp"

namespace cyctea {

using Vector = std::vector<double>;
using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

namespace detail {
inline std::atomic<std::uint64_t>& degenerate_cosines() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}
}  // namespace detail

// Number of cosine evaluations that hit a zero vector since start-up.
inline std::uint64_t degenerate_cosine_count() { return detail::degenerate_cosines().load(); }

inline double dot(ConstVec u, ConstVec v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double norm2(ConstVec u) { return std::sqrt(dot(u, u)); }

inline double cosine(ConstVec u, ConstVec v) {
  if (u.size() != v.size()) throw InvalidArgument("cosine: dimension mismatch");
  double nu = norm2(u);
  double nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) {
    detail::degenerate_cosines().fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  double c = dot(u, v) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

enum class Norm { L1, L2 };

// ||h + r - t|| under the chosen norm.
inline double translational_energy(ConstVec h, ConstVec r, ConstVec t, Norm norm) {
  if (h.size() != r.size() || h.size() != t.size()) {
    throw InvalidArgument("translational_energy: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double d = h[i] + r[i] - t[i];
    s += norm == Norm::L1 ? std::abs(d) : d * d;
  }
  return norm == Norm::L1 ? s : std::sqrt(s);
}

inline void axpy(double a, ConstVec x, MutVec y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void normalize(MutVec u) {
  double n = norm2(u);
  if (n > 0.0) {
    for (double& x : u) x /= n;
  }
}

// Gradient of cos(u, v) with respect to u and v, accumulated with `scale`.
inline double cosine_with_grad(ConstVec u, ConstVec v, double scale, MutVec gu, MutVec gv) {
  double nu = norm2(u);
  double nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  double uv = dot(u, v);
  double c = uv / (nu * nv);
  for (std::size_t i = 0; i < u.size(); ++i) {
    gu[i] += scale * (v[i] / (nu * nv) - c * u[i] / (nu * nu));
    gv[i] += scale * (u[i] / (nu * nv) - c * v[i] / (nv * nv));
  }
  return c;
}

// Row-major matrix helpers.
// y += M x   where M is rows x cols.
inline void gemv_add(const double* m, std::size_t rows, std::size_t cols, ConstVec x, MutVec y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    y[r] += s;
  }
}

// y += M^T x
inline void gemv_t_add(const double* m, std::size_t rows, std::size_t cols, ConstVec x, MutVec y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

// M += x y^T
inline void ger_add(double* m, std::size_t rows, std::size_t cols, ConstVec x, ConstVec y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double xr = x[r];
    if (xr == 0.0) continue;
    double* row = m + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += xr * y[c];
  }
}

}  // namespace cyctea

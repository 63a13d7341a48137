#pragma once

// Independent numerical oracles used to freeze expected values. Nothing here calls
// into the decision code it is used to check.

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <functional>

namespace oracles {

struct PartialSums {
  double s4 = 0, s5 = 0, s6 = 0;  // partial sums up to 1e4, 1e5, 1e6
  double first = 0;               // first nonzero term
  double a3 = 0, a6 = 0;          // terms at 1e3 and 1e6
};

inline PartialSums partial_sums(const std::function<double(std::size_t)>& term, std::size_t start = 1) {
  PartialSums out;
  double sum = 0, comp = 0;
  for (std::size_t k = start; k <= 1000000; ++k) {
    const double a = term(k);
    if (out.first == 0 && a != 0) out.first = a;
    const double y = a - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (k == 1000) out.a3 = a;
    if (k == 10000) out.s4 = sum;
    if (k == 100000) out.s5 = sum;
    if (k == 1000000) {
      out.s6 = sum;
      out.a6 = a;
    }
  }
  return out;
}

/// Divergence is declared when the partial sums grow beyond 1e3 times the first term,
/// when the terms do not decay between 1e3 and 1e6, or when the increments of the
/// partial sums over successive decades stop shrinking (this catches the harmonic
/// boundary case, whose partial sums only reach ~14 at 1e6).
inline bool series_converges(const std::function<double(std::size_t)>& term, std::size_t start = 1) {
  const PartialSums p = partial_sums(term, start);
  if (p.first == 0) return true;
  if (std::abs(p.s6) > 1e3 * std::abs(p.first)) return false;
  if (std::abs(p.a6) >= 0.5 * std::abs(p.a3) && p.a3 != 0) return false;
  const double d1 = std::abs(p.s5 - p.s4);
  const double d2 = std::abs(p.s6 - p.s5);
  if (d1 == 0) return d2 == 0;
  return d2 < 0.5 * d1;
}

inline bool square_summable(const std::function<double(std::size_t)>& seq, std::size_t start = 1) {
  return series_converges([&](std::size_t k) { const double v = seq(k); return v * v; }, start);
}

/// H_b - H_a = sum_{k=a+1}^{b} 1/k, summed from the small end.
inline double harmonic_block(std::size_t a, std::size_t b) {
  double s = 0;
  for (std::size_t k = b; k > a; --k) s += 1.0 / static_cast<double>(k);
  return s;
}

}  // namespace oracles

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

namespace oracles {

using Q = boost::multiprecision::cpp_rational;
using QMatrix = std::vector<std::vector<Q>>;  // row-major

/// Rank by plain Gaussian elimination over the rationals.
inline std::size_t rank(QMatrix m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (m[i][c] == 0) continue;
      const Q f = m[i][c] / m[r][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    ++r;
  }
  return r;
}

/// Basis of {x : m x = 0} from the reduced row echelon form.
inline std::vector<std::vector<Q>> null_space(QMatrix m, std::size_t cols) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    std::size_t p = r;
    while (p < m.size() && m[p][c] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[r]);
    const Q lead = m[r][c];
    for (auto& x : m[r]) x /= lead;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Q f = m[i][c];
      for (std::size_t j = 0; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  std::vector<std::vector<Q>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (std::find(pivots.begin(), pivots.end(), free) != pivots.end()) continue;
    std::vector<Q> v(cols);
    v[free] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free];
    basis.push_back(v);
  }
  return basis;
}

/// Exact decision of ((I + C C^T) D0)^perp meeting D1 only in 0, with bases given as columns lists.
inline bool core_trivial(const QMatrix& c, const std::vector<std::vector<Q>>& d0, const std::vector<std::vector<Q>>& d1) {
  const std::size_t n = c.size();
  QMatrix g(n, std::vector<Q>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Q acc = i == j ? 1 : 0;
      for (std::size_t k = 0; k < n; ++k) acc += c[i][k] * c[j][k];
      g[i][j] = acc;
    }
  QMatrix wt;  // rows are the images of the D0 basis vectors
  for (const auto& b : d0) {
    std::vector<Q> w(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) w[i] += g[i][k] * b[k];
    wt.push_back(w);
  }
  const auto perp = wt.empty() ? [&] {
    std::vector<std::vector<Q>> id;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Q> e(n);
      e[i] = 1;
      id.push_back(e);
    }
    return id;
  }()
                               : null_space(wt, n);
  QMatrix joint = perp;
  joint.insert(joint.end(), d1.begin(), d1.end());
  return rank(joint) == perp.size() + d1.size();
}

}  // namespace oracles

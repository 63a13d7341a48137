#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "opmx/scalar.hpp"
#include "opmx/seqspace.hpp"

namespace opmx {

/// Seeded generator with a portable integer draw (std distributions differ between
/// standard libraries, and reports must be reproducible from the seed alone).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  /// Uniform integer in [lo, hi].
  long uniform(long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(eng_() % span);
  }
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

/// Random finitely supported vector with small integer entries on [0, extent),
/// avoiding the listed coordinates.
inline SparseVector random_sparse_vector(Rng& rng, std::size_t extent, std::size_t max_nnz, long max_abs,
                                         const std::set<std::size_t>& avoid = {}) {
  std::vector<SparseVector::Entry> out;
  const auto count = static_cast<std::size_t>(rng.uniform(1, static_cast<long>(max_nnz)));
  for (std::size_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(rng.uniform(0, static_cast<long>(extent) - 1));
    if (avoid.contains(k)) continue;
    long v = rng.uniform(-max_abs, max_abs);
    if (v == 0) v = 1;
    out.emplace_back(k, Scalar(v));
  }
  return SparseVector(std::move(out));
}

}  // namespace opmx

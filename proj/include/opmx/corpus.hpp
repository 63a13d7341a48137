#pragma once

#include <vector>

#include "opmx/seqspace.hpp"

namespace opmx {

/// Fixed family corpus for descriptor-level checks: power laws around every
/// exponent threshold, unit vectors, finite combinations and mixed sums.
inline std::vector<CoefficientFamily> family_corpus() {
  std::vector<CoefficientFamily> out;
  for (double p : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0})
    for (Sign s : {Sign::AllPlus, Sign::Alternating})
      for (long off : {1L, 2L}) out.push_back(CoefficientFamily::power_law(p, s, off));
  for (std::size_t k = 0; k < 6; ++k) out.push_back(CoefficientFamily::unit(k));
  out.push_back(CoefficientFamily::finite(SparseVector({{0, Scalar(1)}, {1, Scalar(-2)}, {7, Scalar(1, 3)}})));
  out.push_back(CoefficientFamily::finite(SparseVector({{2, Scalar(5)}, {40, Scalar(-1)}})));
  const auto pl = [](double p, long off = 1) { return CoefficientFamily::power_law(p, Sign::AllPlus, off); };
  out.push_back(CoefficientFamily::sum({pl(1, 1), CoefficientFamily::scaled(Scalar(-1), pl(1, 2))}));
  out.push_back(CoefficientFamily::sum({pl(2), CoefficientFamily::unit(0)}));
  out.push_back(CoefficientFamily::sum({pl(1), CoefficientFamily::scaled(Scalar(-1), CoefficientFamily::unit(0))}));
  out.push_back(CoefficientFamily::sum({pl(3), CoefficientFamily::power_law(1.5, Sign::Alternating, 1)}));
  out.push_back(CoefficientFamily::scaled(Scalar(3, 2), pl(2.5, 3)));
  return out;
}

}  // namespace opmx

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "opmx/errors.hpp"
#include "opmx/scalar.hpp"
#include "opmx/seqspace.hpp"
#include "opmx/weight.hpp"

namespace opmx {

enum class Verdict { Yes, No, Unknown };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

/// (j, c_j): coordinate j broadcast along the column c_j(k).
struct SourceColumn {
  std::size_t coord;
  RationalWeight weight;
  friend bool operator==(const SourceColumn& a, const SourceColumn& b) {
    return a.coord == b.coord && a.weight == b.weight;
  }
};

namespace atoms {
struct All {
  friend bool operator==(const All&, const All&) { return true; }
};
/// (w(k) g_k)_k in l2
struct WeightedL2 {
  RationalWeight weight;
  friend bool operator==(const WeightedL2& a, const WeightedL2& b) { return a.weight == b.weight; }
};
/// sum_k c(k) g_k converges
struct SeriesConverges {
  RationalWeight weight;
  friend bool operator==(const SeriesConverges& a, const SeriesConverges& b) { return a.weight == b.weight; }
};
/// (diag(k) g_k + sum_j c_j(k) g_j)_k in l2
struct ResidualL2 {
  RationalWeight diag;
  std::vector<SourceColumn> sources;
  friend bool operator==(const ResidualL2& a, const ResidualL2& b) {
    if (!(a.diag == b.diag) || a.sources.size() != b.sources.size()) return false;
    return std::all_of(a.sources.begin(), a.sources.end(), [&](const SourceColumn& s) {
      return std::find(b.sources.begin(), b.sources.end(), s) != b.sources.end();
    });
  }
};
/// g_j = 0
struct CoordinateZero {
  std::size_t coord;
  friend bool operator==(const CoordinateZero& a, const CoordinateZero& b) { return a.coord == b.coord; }
};
}  // namespace atoms

using DomainAtom = std::variant<atoms::All, atoms::WeightedL2, atoms::SeriesConverges, atoms::ResidualL2, atoms::CoordinateZero>;

inline std::string to_string(const DomainAtom& a) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, atoms::All>) {
          return "All";
        } else if constexpr (std::is_same_v<T, atoms::WeightedL2>) {
          return "WeightedL2(" + x.weight.to_string() + ")";
        } else if constexpr (std::is_same_v<T, atoms::SeriesConverges>) {
          return "SeriesConverges(" + x.weight.to_string() + ")";
        } else if constexpr (std::is_same_v<T, atoms::ResidualL2>) {
          std::string s = "ResidualL2(" + x.diag.to_string();
          for (const auto& src : x.sources) s += ", source(" + std::to_string(src.coord) + ", " + src.weight.to_string() + ")";
          return s + ")";
        } else {
          return "CoordinateZero(" + std::to_string(x.coord) + ")";
        }
      },
      a);
}

/// Conjunction of atoms describing a subspace of l2. The empty conjunction is All.
class DomainDescriptor {
 public:
  DomainDescriptor() = default;
  explicit DomainDescriptor(std::vector<DomainAtom> atoms) {
    for (auto& a : atoms) add(std::move(a));
  }
  DomainDescriptor(std::initializer_list<DomainAtom> atoms) : DomainDescriptor(std::vector<DomainAtom>(atoms)) {}

  static DomainDescriptor all() { return {}; }

  const std::vector<DomainAtom>& atoms() const { return atoms_; }
  bool is_all() const { return atoms_.empty(); }

  /// Order-insensitive equality.
  friend bool operator==(const DomainDescriptor& a, const DomainDescriptor& b) {
    auto covers = [](const DomainDescriptor& x, const DomainDescriptor& y) {
      return std::all_of(y.atoms_.begin(), y.atoms_.end(), [&](const DomainAtom& at) {
        return std::find(x.atoms_.begin(), x.atoms_.end(), at) != x.atoms_.end();
      });
    };
    return covers(a, b) && covers(b, a);
  }

  std::string to_string() const {
    if (atoms_.empty()) return "All";
    std::string s;
    for (const auto& a : atoms_) s += (s.empty() ? "" : " & ") + opmx::to_string(a);
    return s;
  }

 private:
  void add(DomainAtom a) {
    if (std::holds_alternative<atoms::All>(a)) return;
    if (auto* w = std::get_if<atoms::WeightedL2>(&a); w && w->weight.is_bounded_sequence()) return;
    if (auto* c = std::get_if<atoms::SeriesConverges>(&a); c && c->weight.is_zero()) return;
    if (std::find(atoms_.begin(), atoms_.end(), a) == atoms_.end()) atoms_.push_back(std::move(a));
  }
  std::vector<DomainAtom> atoms_;
};

inline DomainDescriptor intersect(const DomainDescriptor& d1, const DomainDescriptor& d2) {
  std::vector<DomainAtom> all(d1.atoms());
  all.insert(all.end(), d2.atoms().begin(), d2.atoms().end());
  return DomainDescriptor(std::move(all));
}

namespace detail {

/// Asymptotic piece of a sequence: magnitude ~ k^exponent. When `exact` is false,
/// leading-order cancellation happened and `exponent` is only an upper bound.
struct Component {
  Sign kind;
  double exponent;
  bool exact;
};

inline double frac_part(double p) { return p - std::floor(p); }

/// Splits an expression's infinite part into non-cancelling components: per sign kind,
/// one exact rational function for all integer exponents (plus `extra_plain`), and one
/// component per fractional exponent class.
inline std::vector<Component> components(const SequenceExpr& e, const RationalWeight& extra_plain = {},
                                         bool extra_inexact = false) {
  std::vector<Component> out;
  for (Sign kind : {Sign::AllPlus, Sign::Alternating}) {
    RationalWeight rational;
    std::map<double, std::vector<const PowerTerm*>> classes;
    for (const auto& t : e.terms()) {
      if (t.sign != kind) continue;
      if (is_integral(t.p)) {
        rational = rational + t.mult * RationalWeight::shifted_power(Scalar(1), t.offset, static_cast<long>(t.p));
      } else {
        classes[frac_part(t.p)].push_back(&t);
      }
    }
    if (kind == Sign::AllPlus && !extra_plain.is_zero()) {
      const RationalWeight before = rational;
      rational = rational + extra_plain;
      if (extra_inexact) {
        const int bound = std::max(before.degree().value_or(-1000000), *extra_plain.degree());
        const int got = rational.degree().value_or(-1000000);
        if (got < bound) {
          out.push_back({kind, static_cast<double>(bound - 1), false});
          rational = RationalWeight{};
        }
      }
    }
    if (!rational.is_zero()) out.push_back({kind, static_cast<double>(*rational.degree()), true});
    for (const auto& [fr, terms] : classes) {
      double top = -1e300;
      for (const auto* t : terms) top = std::max(top, *t->mult.degree() - t->p);
      Scalar lead(0);
      for (const auto* t : terms)
        if (*t->mult.degree() - t->p == top) lead += t->mult.leading_coefficient();
      if (lead != 0) {
        out.push_back({kind, top, true});
      } else {
        out.push_back({kind, top - 1.0, false});
      }
    }
  }
  return out;
}

enum class Criterion { SquareSummable, SeriesConvergent };

inline bool exponent_ok(Criterion c, Sign kind, double e) {
  if (c == Criterion::SquareSummable) return 2.0 * e < -1.0;
  return kind == Sign::AllPlus ? e < -1.0 : e < 0.0;
}

/// Components in distinct classes never cancel each other, so a single failing exact
/// component decides No; inexact components only ever produce Unknown.
inline Verdict decide(const std::vector<Component>& comps, Criterion c) {
  bool unknown = false;
  for (const auto& comp : comps) {
    if (exponent_ok(c, comp.kind, comp.exponent)) continue;
    if (comp.exact) return Verdict::No;
    unknown = true;
  }
  return unknown ? Verdict::Unknown : Verdict::Yes;
}

inline Verdict conj(Verdict a, Verdict b) {
  if (a == Verdict::No || b == Verdict::No) return Verdict::No;
  if (a == Verdict::Unknown || b == Verdict::Unknown) return Verdict::Unknown;
  return Verdict::Yes;
}

}  // namespace detail

/// Decides one atom for a sequence expression, without the implicit l2 requirement.
inline Verdict member_atom(const SequenceExpr& e, const DomainAtom& atom) {
  using detail::Criterion;
  return std::visit(
      [&](const auto& a) -> Verdict {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, atoms::All>) {
          return Verdict::Yes;
        } else if constexpr (std::is_same_v<T, atoms::WeightedL2>) {
          // Weights have no poles on the index set, so finite support stays finite.
          if (e.is_finite()) return Verdict::Yes;
          return detail::decide(detail::components(e.times(a.weight)), Criterion::SquareSummable);
        } else if constexpr (std::is_same_v<T, atoms::SeriesConverges>) {
          if (e.is_finite()) return Verdict::Yes;
          return detail::decide(detail::components(e.times(a.weight)), Criterion::SeriesConvergent);
        } else if constexpr (std::is_same_v<T, atoms::ResidualL2>) {
          RationalWeight tail;
          bool inexact = false;
          for (const auto& src : a.sources) {
            if (src.weight.in_l2()) continue;
            Scalar value;
            if (auto v = e.eval_exact(src.coord)) {
              value = *v;
            } else {
              value = from_double(e.eval(src.coord));
              inexact = true;
            }
            if (value != 0) tail = tail + value * src.weight;
          }
          const SequenceExpr head = e.is_finite() ? SequenceExpr() : e.times(a.diag);
          return detail::decide(detail::components(head, tail, inexact), Criterion::SquareSummable);
        } else {
          if (auto v = e.eval_exact(a.coord)) return *v == 0 ? Verdict::Yes : Verdict::No;
          return std::abs(e.eval(a.coord)) > 1e-12 ? Verdict::No : Verdict::Unknown;
        }
      },
      atom);
}

/// Membership of a sequence in a domain; every domain is a subspace of l2, so square
/// summability is always part of the conjunction.
inline Verdict member(const SequenceExpr& e, const DomainDescriptor& d) {
  Verdict v = member_atom(e, atoms::WeightedL2{weights::one()});
  for (const auto& a : d.atoms()) {
    v = detail::conj(v, member_atom(e, a));
    if (v == Verdict::No) return v;
  }
  return v;
}

inline Verdict member(const CoefficientFamily& f, const DomainDescriptor& d) { return member(f.expand(), d); }
inline Verdict member(const SparseVector& f, const DomainDescriptor& d) { return member(SequenceExpr(f, {}), d); }

namespace detail {

/// Exact row reduction; returns the reduced rows (row echelon, pivots normalized to 1).
inline std::vector<std::vector<Scalar>> row_reduce(std::vector<std::vector<Scalar>> m, std::size_t cols) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    std::size_t piv = r;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[r], m[piv]);
    const Scalar inv = Scalar(1) / m[r][c];
    for (auto& x : m[r]) x *= inv;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Scalar f = m[i][c];
      for (std::size_t j = 0; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    ++r;
  }
  m.resize(r);
  return m;
}

inline std::size_t exact_rank(std::vector<std::vector<Scalar>> m, std::size_t cols) {
  return row_reduce(std::move(m), cols).size();
}

/// Linear conditions on the coordinates g_j equivalent to sum_j g_j d_j(k) being in l2.
inline std::vector<std::map<std::size_t, Scalar>> l2_conditions(const std::vector<SourceColumn>& cols) {
  std::vector<const SourceColumn*> big;
  for (const auto& c : cols)
    if (!c.weight.in_l2()) big.push_back(&c);
  if (big.empty()) return {};
  Polynomial common = Polynomial::constant(1);
  for (const auto* c : big) common = common * c->weight.den();
  std::vector<Polynomial> nums;
  int top = 0;
  for (const auto* c : big) {
    nums.push_back(c->weight.num() * Polynomial::divmod(common, c->weight.den()).first);
    top = std::max(top, nums.back().degree());
  }
  std::vector<std::map<std::size_t, Scalar>> rows;
  for (int m = common.degree(); m <= top; ++m) {
    std::map<std::size_t, Scalar> row;
    for (std::size_t i = 0; i < big.size(); ++i) {
      Scalar c = nums[i].coeff(static_cast<std::size_t>(m));
      if (c != 0) row[big[i]->coord] += c;
    }
    std::erase_if(row, [](const auto& kv) { return kv.second == 0; });
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

/// lambda with a == lambda * b, when it exists and b is nonzero.
inline std::optional<Scalar> proportional(const RationalWeight& a, const RationalWeight& b) {
  if (b.is_zero()) return std::nullopt;
  if (a.is_zero()) return Scalar(0);
  if (a.degree() != b.degree()) return std::nullopt;
  const Scalar lambda = a.leading_coefficient() / b.leading_coefficient();
  if (a == lambda * b) return lambda;
  return std::nullopt;
}

}  // namespace detail

/// Coordinates j with g_j = 0 for every member g, found by eliminating the diagonal
/// parts of pairs of l2 conditions with proportional diagonals. Sound, not complete.
inline std::set<std::size_t> forced_coordinates(const DomainDescriptor& d) {
  struct L2Cond {
    RationalWeight diag;
    std::vector<SourceColumn> sources;
  };
  std::vector<L2Cond> conds{{weights::one(), {}}};
  std::vector<std::map<std::size_t, Scalar>> rows;
  for (const auto& a : d.atoms()) {
    if (const auto* w = std::get_if<atoms::WeightedL2>(&a)) conds.push_back({w->weight, {}});
    if (const auto* r = std::get_if<atoms::ResidualL2>(&a)) conds.push_back({r->diag, r->sources});
    if (const auto* z = std::get_if<atoms::CoordinateZero>(&a)) rows.push_back({{z->coord, Scalar(1)}});
  }
  auto add_rows = [&](const std::vector<SourceColumn>& cols) {
    for (auto& r : detail::l2_conditions(cols)) rows.push_back(std::move(r));
  };
  for (const auto& c : conds)
    if (c.diag.is_zero()) add_rows(c.sources);
  for (std::size_t i = 0; i < conds.size(); ++i) {
    for (std::size_t j = 0; j < conds.size(); ++j) {
      if (i == j) continue;
      auto lambda = detail::proportional(conds[i].diag, conds[j].diag);
      if (!lambda) continue;
      std::map<std::size_t, RationalWeight> diff;
      for (const auto& s : conds[i].sources) diff[s.coord] = diff[s.coord] + s.weight;
      for (const auto& s : conds[j].sources) diff[s.coord] = diff[s.coord] - (*lambda) * s.weight;
      std::vector<SourceColumn> cols;
      for (auto& [coord, w] : diff)
        if (!w.is_zero()) cols.push_back({coord, w});
      add_rows(cols);
    }
  }
  std::set<std::size_t> vars;
  for (const auto& r : rows)
    for (const auto& [j, c] : r) vars.insert(j);
  if (vars.empty()) return {};
  std::vector<std::size_t> index(vars.begin(), vars.end());
  auto col_of = [&](std::size_t j) {
    return static_cast<std::size_t>(std::lower_bound(index.begin(), index.end(), j) - index.begin());
  };
  std::vector<std::vector<Scalar>> m;
  for (const auto& r : rows) {
    std::vector<Scalar> dense(index.size());
    for (const auto& [j, c] : r) dense[col_of(j)] = c;
    m.push_back(std::move(dense));
  }
  const std::size_t base_rank = detail::exact_rank(m, index.size());
  std::set<std::size_t> forced;
  for (std::size_t j : index) {
    auto ext = m;
    std::vector<Scalar> unit(index.size());
    unit[col_of(j)] = 1;
    ext.push_back(std::move(unit));
    if (detail::exact_rank(std::move(ext), index.size()) == base_rank) forced.insert(j);
  }
  return forced;
}

/// Every finitely supported vector belongs to the domain.
inline bool admits_all_finite(const DomainDescriptor& d) {
  for (const auto& a : d.atoms()) {
    if (std::holds_alternative<atoms::CoordinateZero>(a)) return false;
    if (const auto* r = std::get_if<atoms::ResidualL2>(&a)) {
      for (const auto& s : r->sources)
        if (!s.weight.in_l2()) return false;
    }
  }
  return true;
}

/// Finitely supported vectors vanishing on the listed coordinates are all members;
/// these are the coordinates carrying non-l2 source columns.
inline std::set<std::size_t> blocking_coordinates(const DomainDescriptor& d) {
  std::set<std::size_t> out;
  for (const auto& a : d.atoms()) {
    if (const auto* z = std::get_if<atoms::CoordinateZero>(&a)) out.insert(z->coord);
    if (const auto* r = std::get_if<atoms::ResidualL2>(&a))
      for (const auto& s : r->sources)
        if (!s.weight.in_l2()) out.insert(s.coord);
  }
  return out;
}

/// Symbolic sufficient test for d1 being contained in d2. False means "not proven".
inline bool provably_includes(const DomainDescriptor& d1, const DomainDescriptor& d2) {
  std::vector<RationalWeight> l2_weights{weights::one()};
  for (const auto& a : d1.atoms()) {
    if (const auto* w = std::get_if<atoms::WeightedL2>(&a)) l2_weights.push_back(w->weight);
    if (const auto* r = std::get_if<atoms::ResidualL2>(&a)) {
      if (std::all_of(r->sources.begin(), r->sources.end(), [](const SourceColumn& s) { return s.weight.in_l2(); }))
        l2_weights.push_back(r->diag);
    }
  }
  auto weighted_implied = [&](const RationalWeight& w2) {
    if (w2.is_bounded_sequence()) return true;
    return std::any_of(l2_weights.begin(), l2_weights.end(),
                       [&](const RationalWeight& w1) { return !w1.is_zero() && *w2.degree() <= *w1.degree(); });
  };
  const auto forced = forced_coordinates(d1);
  for (const auto& a : d2.atoms()) {
    if (std::find(d1.atoms().begin(), d1.atoms().end(), a) != d1.atoms().end()) continue;
    const bool ok = std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, atoms::All>) {
            return true;
          } else if constexpr (std::is_same_v<T, atoms::WeightedL2>) {
            return weighted_implied(x.weight);
          } else if constexpr (std::is_same_v<T, atoms::SeriesConverges>) {
            // Cauchy-Schwarz: sum c g = sum (c/w)(w g) converges absolutely when c/w is in l2.
            return std::any_of(l2_weights.begin(), l2_weights.end(), [&](const RationalWeight& w1) {
              return !w1.is_zero() && *x.weight.degree() - *w1.degree() <= -1;
            });
          } else if constexpr (std::is_same_v<T, atoms::ResidualL2>) {
            return std::all_of(x.sources.begin(), x.sources.end(), [](const SourceColumn& s) { return s.weight.in_l2(); }) &&
                   weighted_implied(x.diag);
          } else {
            return forced.contains(x.coord);
          }
        },
        a);
    if (!ok) return false;
  }
  return true;
}

}  // namespace opmx

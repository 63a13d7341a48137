#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opmx/domains.hpp"
#include "opmx/errors.hpp"
#include "opmx/matrix.hpp"
#include "opmx/scalar.hpp"
#include "opmx/seqspace.hpp"
#include "opmx/weight.hpp"

namespace opmx {

/// Anchor of a structured operator: a sink collects sum_k w(k) g_k into coordinate
/// `coord`; a source broadcasts g_coord along the column (w(k))_k.
struct Anchor {
  std::size_t coord;
  RationalWeight weight;
  friend bool operator==(const Anchor& a, const Anchor& b) { return a.coord == b.coord && a.weight == b.weight; }
};

/// Image of a finitely supported vector: finite part plus multiples of source columns.
class AppliedVector {
 public:
  struct Tail {
    RationalWeight weight;
    Scalar multiplier;
  };

  AppliedVector() = default;
  AppliedVector(SparseVector finite, std::vector<Tail> tails) : finite_(std::move(finite)), tails_(std::move(tails)) {
    merge();
  }
  explicit AppliedVector(SparseVector finite) : finite_(std::move(finite)) {}

  const SparseVector& finite() const { return finite_; }
  const std::vector<Tail>& tails() const { return tails_; }
  bool has_tail() const { return !tails_.empty(); }

  /// sum of multiplier * weight over all tails, as one rational function.
  RationalWeight combined_tail() const {
    RationalWeight acc;
    for (const auto& t : tails_) acc = acc + t.multiplier * t.weight;
    return acc;
  }
  bool in_l2() const { return combined_tail().in_l2(); }

  Scalar coefficient(std::size_t k) const {
    Scalar v = finite_.at(k);
    for (const auto& t : tails_) v += t.multiplier * t.weight.eval(k);
    return v;
  }

  SparseVector truncated(std::size_t n) const {
    std::vector<SparseVector::Entry> out;
    for (const auto& [k, v] : finite_.entries())
      if (k < n) out.emplace_back(k, v);
    for (const auto& t : tails_)
      for (std::size_t k = 0; k < n; ++k) out.emplace_back(k, t.multiplier * t.weight.eval(k));
    return SparseVector(std::move(out));
  }

  /// Pointwise product with a diagonal weight.
  AppliedVector times(const RationalWeight& w) const {
    std::vector<SparseVector::Entry> fin;
    for (const auto& [k, v] : finite_.entries()) fin.emplace_back(k, v * w.eval(k));
    std::vector<Tail> ts;
    for (const auto& t : tails_) ts.push_back({w * t.weight, t.multiplier});
    return {SparseVector(std::move(fin)), std::move(ts)};
  }

  friend AppliedVector operator+(const AppliedVector& a, const AppliedVector& b) {
    std::vector<Tail> ts(a.tails_);
    ts.insert(ts.end(), b.tails_.begin(), b.tails_.end());
    return {a.finite_ + b.finite_, std::move(ts)};
  }
  friend AppliedVector operator*(const Scalar& s, const AppliedVector& a) {
    std::vector<Tail> ts(a.tails_);
    for (auto& t : ts) t.multiplier *= s;
    return {s * a.finite_, std::move(ts)};
  }
  friend AppliedVector operator-(const AppliedVector& a, const AppliedVector& b) { return a + Scalar(-1) * b; }

  /// Equality as sequences. A rational function that agrees with a finitely supported
  /// sequence for all large k is zero, so tails and finite parts compare separately.
  friend bool operator==(const AppliedVector& a, const AppliedVector& b) {
    return a.finite_ == b.finite_ && a.combined_tail() == b.combined_tail();
  }

  std::string to_string() const {
    std::string s = finite_.to_string();
    for (const auto& t : tails_) s += " + (" + t.multiplier.str() + ")*[" + t.weight.to_string() + "]_k";
    return s;
  }

 private:
  void merge() {
    std::vector<Tail> out;
    for (auto& t : tails_) {
      auto it = std::find_if(out.begin(), out.end(), [&](const Tail& o) { return o.weight == t.weight; });
      if (it == out.end()) {
        out.push_back(std::move(t));
      } else {
        it->multiplier += t.multiplier;
      }
    }
    std::erase_if(out, [](const Tail& t) { return t.multiplier == 0 || t.weight.is_zero(); });
    tails_ = std::move(out);
  }

  SparseVector finite_;
  std::vector<Tail> tails_;
};

inline Scalar inner(const AppliedVector& a, const SparseVector& g) {
  Scalar acc = inner(a.finite(), g);
  for (const auto& t : a.tails()) {
    Scalar part(0);
    for (const auto& [k, v] : g.entries()) part += t.weight.eval(k) * v;
    acc += t.multiplier * part;
  }
  return acc;
}
inline Scalar inner(const SparseVector& g, const AppliedVector& a) { return inner(a, g); }

/// Rational-function diagonal plus finitely many anchor sinks and sources.
class StructuredOperator {
 public:
  StructuredOperator() = default;
  StructuredOperator(std::string name, RationalWeight diag, std::vector<Anchor> sinks = {}, std::vector<Anchor> sources = {})
      : name_(std::move(name)), diag_(std::move(diag)), sinks_(std::move(sinks)), sources_(std::move(sources)) {
    auto distinct = [](const std::vector<Anchor>& v, const char* what) {
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
          if (v[i].coord == v[j].coord)
            throw Error(ErrorKind::InvalidInput, std::string(what) + " coordinates must be distinct");
    };
    distinct(sinks_, "sink");
    distinct(sources_, "source");
    std::erase_if(sinks_, [](const Anchor& a) { return a.weight.is_zero(); });
    std::erase_if(sources_, [](const Anchor& a) { return a.weight.is_zero(); });
  }

  static StructuredOperator zero() { return {"0", RationalWeight::zero()}; }
  static StructuredOperator identity() { return {"I", weights::one()}; }
  static StructuredOperator diagonal(std::string name, RationalWeight d) { return {std::move(name), std::move(d)}; }

  const std::string& name() const { return name_; }
  const RationalWeight& diag() const { return diag_; }
  const std::vector<Anchor>& sinks() const { return sinks_; }
  const std::vector<Anchor>& sources() const { return sources_; }

  bool is_zero() const { return diag_.is_zero() && sinks_.empty() && sources_.empty(); }
  bool anchor_free() const { return sinks_.empty() && sources_.empty(); }

  StructuredOperator renamed(std::string name) const {
    StructuredOperator out = *this;
    out.name_ = std::move(name);
    return out;
  }

  /// Same diagonal and same anchor sets; names are ignored.
  friend bool structurally_equal(const StructuredOperator& a, const StructuredOperator& b) {
    auto same_set = [](const std::vector<Anchor>& x, const std::vector<Anchor>& y) {
      if (x.size() != y.size()) return false;
      return std::all_of(x.begin(), x.end(), [&](const Anchor& a) { return std::find(y.begin(), y.end(), a) != y.end(); });
    };
    return a.diag_ == b.diag_ && same_set(a.sinks_, b.sinks_) && same_set(a.sources_, b.sources_);
  }

  friend StructuredOperator operator+(const StructuredOperator& a, const StructuredOperator& b) {
    auto merge = [](std::vector<Anchor> x, const std::vector<Anchor>& y) {
      for (const auto& an : y) {
        auto it = std::find_if(x.begin(), x.end(), [&](const Anchor& o) { return o.coord == an.coord; });
        if (it == x.end()) {
          x.push_back(an);
        } else {
          it->weight = it->weight + an.weight;
        }
      }
      return x;
    };
    return {"(" + a.name_ + "+" + b.name_ + ")", a.diag_ + b.diag_, merge(a.sinks_, b.sinks_), merge(a.sources_, b.sources_)};
  }
  friend StructuredOperator operator*(const Scalar& s, const StructuredOperator& a) {
    auto scale = [&](std::vector<Anchor> x) {
      for (auto& an : x) an.weight = s * an.weight;
      return x;
    };
    std::string name = s == -1 ? "-" + a.name_ : s.str() + "*" + a.name_;
    return {std::move(name), s * a.diag_, scale(a.sinks_), scale(a.sources_)};
  }
  friend StructuredOperator operator-(const StructuredOperator& a) { return Scalar(-1) * a; }
  friend StructuredOperator operator-(const StructuredOperator& a, const StructuredOperator& b) {
    return (a + (-b)).renamed("(" + a.name_ + "-" + b.name_ + ")");
  }

  std::string to_string() const {
    std::string s = name_ + ": diag " + diag_.to_string();
    for (const auto& a : sinks_) s += ", sink(" + std::to_string(a.coord) + ", " + a.weight.to_string() + ")";
    for (const auto& a : sources_) s += ", source(" + std::to_string(a.coord) + ", " + a.weight.to_string() + ")";
    return s;
  }

 private:
  std::string name_ = "0";
  RationalWeight diag_;
  std::vector<Anchor> sinks_;
  std::vector<Anchor> sources_;
};

/// Real coefficients: the adjoint keeps the diagonal and exchanges sinks and sources.
inline StructuredOperator formal_adjoint_op(const StructuredOperator& op) {
  std::string name = op.name();
  if (!name.empty() && name.back() == '*') {
    name.pop_back();
  } else if (!op.is_zero()) {
    name += "*";
  }
  return {std::move(name), op.diag(), op.sources(), op.sinks()};
}

/// Maximal natural domain: every defining series converges and the image is in l2.
inline DomainDescriptor domain_of(const StructuredOperator& op) {
  std::vector<DomainAtom> atoms;
  for (const auto& s : op.sinks()) atoms.emplace_back(atoms::SeriesConverges{s.weight});
  if (op.sources().empty()) {
    atoms.emplace_back(atoms::WeightedL2{op.diag()});
  } else {
    std::vector<SourceColumn> cols;
    for (const auto& s : op.sources()) cols.push_back({s.coord, s.weight});
    atoms.emplace_back(atoms::ResidualL2{op.diag(), std::move(cols)});
  }
  return DomainDescriptor(std::move(atoms));
}

/// The defining formula applied to a finitely supported vector, without a domain check.
inline AppliedVector apply_formal(const StructuredOperator& op, const SparseVector& x) {
  std::vector<SparseVector::Entry> fin;
  for (const auto& [k, v] : x.entries()) fin.emplace_back(k, op.diag().eval(k) * v);
  for (const auto& s : op.sinks()) {
    Scalar acc(0);
    for (const auto& [k, v] : x.entries()) acc += s.weight.eval(k) * v;
    if (acc != 0) fin.emplace_back(s.coord, acc);
  }
  std::vector<AppliedVector::Tail> tails;
  for (const auto& s : op.sources()) {
    Scalar xj = x.at(s.coord);
    if (xj != 0) tails.push_back({s.weight, xj});
  }
  return {SparseVector(std::move(fin)), std::move(tails)};
}

inline AppliedVector apply(const StructuredOperator& op, const SparseVector& x) {
  const Verdict v = member(x, domain_of(op));
  if (v == Verdict::No) throw Error(ErrorKind::NotInDomain, x.to_string() + " is not in D(" + op.name() + ")");
  if (v == Verdict::Unknown) throw Error(ErrorKind::Undecidable, "membership of " + x.to_string() + " in D(" + op.name() + ")");
  AppliedVector out = apply_formal(op, x);
  if (!out.in_l2()) throw Error(ErrorKind::NotInDomain, "image of " + x.to_string() + " under " + op.name() + " is not in l2");
  return out;
}

/// Applies to a coefficient family; the image is representable for finitely supported families.
inline AppliedVector apply(const StructuredOperator& op, const CoefficientFamily& f) {
  const SequenceExpr e = f.expand();
  if (!e.is_finite()) {
    const Verdict v = member(e, domain_of(op));
    if (v == Verdict::No) throw Error(ErrorKind::NotInDomain, f.to_string() + " is not in D(" + op.name() + ")");
    throw Error(ErrorKind::NotRepresentable, "image of an infinitely supported family has no closed form here");
  }
  return apply(op, e.finite());
}

/// Entry (j, k) is the coefficient of e_j in op(e_k), j, k < N.
inline ExactMatrix truncation_matrix(const StructuredOperator& op, Truncation t) {
  const std::size_t n = t.n;
  ExactMatrix m(n, n);
  if (!op.diag().is_zero())
    for (std::size_t k = 0; k < n; ++k) m(k, k) = op.diag().eval(k);
  for (const auto& s : op.sinks())
    if (s.coord < n)
      for (std::size_t k = 0; k < n; ++k) m(s.coord, k) += s.weight.eval(k);
  for (const auto& s : op.sources())
    if (s.coord < n)
      for (std::size_t i = 0; i < n; ++i) m(i, s.coord) += s.weight.eval(i);
  return m;
}

inline Verdict is_bounded(const StructuredOperator& op) {
  if (!op.diag().is_bounded_sequence()) return Verdict::No;
  for (const auto& a : op.sinks())
    if (!a.weight.in_l2()) return Verdict::No;
  for (const auto& a : op.sources())
    if (!a.weight.in_l2()) return Verdict::No;
  return Verdict::Yes;
}

/// Injective on its domain: anchor-free with a diagonal that never vanishes.
inline bool provably_injective(const StructuredOperator& op) { return op.anchor_free() && op.diag().nonvanishing(); }

/// An image as a closed-form sequence; each tail is a p = 0 power term.
inline SequenceExpr to_sequence(const AppliedVector& a) {
  std::vector<PowerTerm> terms;
  for (const auto& t : a.tails()) terms.push_back({t.multiplier * t.weight, 0.0, Sign::AllPlus, 1});
  return {a.finite(), std::move(terms)};
}

/// The defining formula on a closed-form sequence. Sinks need a finite input (their
/// series has no closed form otherwise); source coordinates must evaluate exactly.
inline SequenceExpr apply_symbolic(const StructuredOperator& op, const SequenceExpr& x) {
  if (x.is_finite()) return to_sequence(apply_formal(op, x.finite()));
  if (!op.sinks().empty())
    throw Error(ErrorKind::NotRepresentable, op.name() + " has sinks; image of an infinitely supported sequence");
  SequenceExpr out = x.times(op.diag());
  for (const auto& s : op.sources()) {
    auto xj = x.eval_exact(s.coord);
    if (!xj) throw Error(ErrorKind::NotRepresentable, "irrational coordinate feeds a source of " + op.name());
    out = out + SequenceExpr({}, {{*xj * s.weight, 0.0, Sign::AllPlus, 1}});
  }
  return out;
}

/// The defining formula on an image, used for composing structured operators.
inline AppliedVector apply_formal(const StructuredOperator& op, const AppliedVector& x) {
  if (!x.has_tail()) return apply_formal(op, x.finite());
  if (!op.sinks().empty()) throw Error(ErrorKind::NotRepresentable, op.name() + " has sinks; image of a tail");
  AppliedVector out = x.times(op.diag());
  std::vector<AppliedVector::Tail> tails;
  for (const auto& s : op.sources()) tails.push_back({s.weight, x.coefficient(s.coord)});
  return out + AppliedVector({}, std::move(tails));
}

}  // namespace opmx

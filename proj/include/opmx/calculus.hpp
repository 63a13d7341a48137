#pragma once

#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "opmx/domains.hpp"
#include "opmx/errors.hpp"
#include "opmx/matrix.hpp"
#include "opmx/operators.hpp"

namespace opmx {

/// f_1 + ... + f_n in the direct sum; one finitely supported vector per block.
using BlockVector = std::vector<SparseVector>;
using BlockImage = std::vector<AppliedVector>;

inline Scalar inner(const BlockImage& a, const BlockVector& g) {
  if (a.size() != g.size()) throw Error(ErrorKind::ShapeMismatch, "block inner product");
  Scalar acc(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += inner(a[i], g[i]);
  return acc;
}
inline Scalar inner(const BlockVector& f, const BlockImage& b) { return inner(b, f); }

/// m x n grid of structured operators acting on the direct sum of n copies of l2.
class OpMatrix {
 public:
  OpMatrix() = default;
  explicit OpMatrix(std::vector<std::vector<StructuredOperator>> grid) : grid_(std::move(grid)) {
    if (grid_.empty() || grid_[0].empty()) throw Error(ErrorKind::ShapeMismatch, "empty operator grid");
    for (const auto& row : grid_)
      if (row.size() != grid_[0].size()) throw Error(ErrorKind::ShapeMismatch, "ragged operator grid");
    for (std::size_t j = 0; j < cols(); ++j) {
      DomainDescriptor d;
      for (const auto& row : grid_) d = intersect(d, domain_of(row[j]));
      domains_.push_back(std::move(d));
    }
  }
  static OpMatrix zero(std::size_t m, std::size_t n) {
    return OpMatrix(std::vector<std::vector<StructuredOperator>>(m, std::vector<StructuredOperator>(n, StructuredOperator::zero())));
  }

  std::size_t rows() const { return grid_.size(); }
  std::size_t cols() const { return grid_.empty() ? 0 : grid_[0].size(); }
  const StructuredOperator& at(std::size_t i, std::size_t j) const { return grid_.at(i).at(j); }
  const std::vector<std::vector<StructuredOperator>>& grid() const { return grid_; }

  /// Block j of the domain: the intersection of the domains down column j.
  const DomainDescriptor& block_domain(std::size_t j) const { return domains_.at(j); }
  const std::vector<DomainDescriptor>& block_domains() const { return domains_; }
  std::set<std::size_t> forced(std::size_t j) const { return forced_coordinates(block_domain(j)); }
  /// Recorded, not enforced: no block domain has a forced coordinate.
  bool densely_defined() const {
    for (std::size_t j = 0; j < cols(); ++j)
      if (!forced(j).empty()) return false;
    return true;
  }

  Verdict contains(const BlockVector& f) const {
    check_arity(f.size());
    Verdict v = Verdict::Yes;
    for (std::size_t j = 0; j < cols(); ++j) v = detail::conj(v, member(f[j], block_domain(j)));
    return v;
  }

  BlockImage apply_formal(const BlockVector& f) const {
    check_arity(f.size());
    BlockImage out(rows());
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) out[i] = out[i] + opmx::apply_formal(grid_[i][j], f[j]);
    return out;
  }

  BlockImage apply(const BlockVector& f) const {
    check_arity(f.size());
    for (std::size_t j = 0; j < cols(); ++j) {
      const Verdict v = member(f[j], block_domain(j));
      if (v == Verdict::No) throw Error(ErrorKind::NotInDomain, "block " + std::to_string(j) + " " + f[j].to_string());
      if (v == Verdict::Unknown) throw Error(ErrorKind::Undecidable, "block " + std::to_string(j) + " " + f[j].to_string());
    }
    BlockImage out = apply_formal(f);
    for (const auto& part : out)
      if (!part.in_l2()) throw Error(ErrorKind::NotInDomain, "image is not in l2");
    return out;
  }

  /// (mN) x (nN) compression, block (i, j) at rows iN.., columns jN...
  ExactMatrix truncation(Truncation t) const {
    ExactMatrix m(rows() * t.n, cols() * t.n);
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) m.place(truncation_matrix(grid_[i][j], t), i * t.n, j * t.n);
    return m;
  }

  friend bool structurally_equal(const OpMatrix& a, const OpMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j)
        if (!structurally_equal(a.grid_[i][j], b.grid_[i][j])) return false;
    return true;
  }

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < rows(); ++i) {
      s += i ? "; " : "";
      for (std::size_t j = 0; j < cols(); ++j) s += (j ? ", " : "") + grid_[i][j].name();
    }
    return s + "]";
  }

 private:
  void check_arity(std::size_t n) const {
    if (n != cols()) throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(cols()) + " blocks, got " + std::to_string(n));
  }

  std::vector<std::vector<StructuredOperator>> grid_;
  std::vector<DomainDescriptor> domains_;
};

/// (f_1 + ... + f_n) -> sum R_j f_j on the direct sum of the entry domains.
class RowOp {
 public:
  explicit RowOp(std::vector<StructuredOperator> entries)
      : m_(std::vector<std::vector<StructuredOperator>>{std::move(entries)}) {}

  std::size_t size() const { return m_.cols(); }
  const StructuredOperator& at(std::size_t j) const { return m_.at(0, j); }
  std::vector<StructuredOperator> entries() const { return m_.grid()[0]; }
  const OpMatrix& matrix() const { return m_; }

  std::vector<DomainDescriptor> block_domains() const { return m_.block_domains(); }
  bool densely_defined() const { return m_.densely_defined(); }
  Verdict contains(const BlockVector& f) const { return m_.contains(f); }
  AppliedVector apply(const BlockVector& f) const { return m_.apply(f)[0]; }
  /// N x (nN).
  ExactMatrix truncation(Truncation t) const { return m_.truncation(t); }

  friend bool structurally_equal(const RowOp& a, const RowOp& b) { return structurally_equal(a.m_, b.m_); }
  std::string to_string() const { return "row" + m_.to_string(); }

 private:
  OpMatrix m_;
};

/// f -> C_1 f + ... + C_n f on the intersection of the entry domains.
class ColOp {
 public:
  explicit ColOp(const std::vector<StructuredOperator>& entries) : m_(as_column(entries)) {}

  std::size_t size() const { return m_.rows(); }
  const StructuredOperator& at(std::size_t i) const { return m_.at(i, 0); }
  std::vector<StructuredOperator> entries() const {
    std::vector<StructuredOperator> out;
    for (const auto& row : m_.grid()) out.push_back(row[0]);
    return out;
  }
  const OpMatrix& matrix() const { return m_; }

  DomainDescriptor domain() const { return m_.block_domain(0); }
  bool densely_defined() const { return m_.densely_defined(); }
  Verdict contains(const SparseVector& f) const { return m_.contains({f}); }
  BlockImage apply(const SparseVector& f) const { return m_.apply({f}); }
  /// (nN) x N.
  ExactMatrix truncation(Truncation t) const { return m_.truncation(t); }

  friend bool structurally_equal(const ColOp& a, const ColOp& b) { return structurally_equal(a.m_, b.m_); }
  std::string to_string() const { return "col" + m_.to_string(); }

 private:
  static OpMatrix as_column(const std::vector<StructuredOperator>& entries) {
    std::vector<std::vector<StructuredOperator>> grid;
    for (const auto& e : entries) grid.push_back({e});
    return OpMatrix(std::move(grid));
  }

  OpMatrix m_;
};

enum class CompositeKind { Row, Col, Matrix };
using Composite = std::variant<RowOp, ColOp, OpMatrix>;

/// Rows take a 1 x n grid, columns an n x 1 grid.
inline Composite assemble(CompositeKind kind, const std::vector<std::vector<StructuredOperator>>& parts) {
  OpMatrix m(parts);
  switch (kind) {
    case CompositeKind::Row:
      if (m.rows() != 1) throw Error(ErrorKind::ShapeMismatch, "a row operator has exactly one row");
      return RowOp(parts[0]);
    case CompositeKind::Col: {
      if (m.cols() != 1) throw Error(ErrorKind::ShapeMismatch, "a column operator has exactly one column");
      std::vector<StructuredOperator> entries;
      for (const auto& r : parts) entries.push_back(r[0]);
      return ColOp(entries);
    }
    case CompositeKind::Matrix:
      return m;
  }
  throw Error(ErrorKind::InvalidInput, "composite kind");
}

inline const OpMatrix& as_matrix(const Composite& c) {
  return std::visit([](const auto& x) -> const OpMatrix& {
    if constexpr (std::is_same_v<std::decay_t<decltype(x)>, OpMatrix>) {
      return x;
    } else {
      return x.matrix();
    }
  }, c);
}

namespace detail {
inline void require_dense(const StructuredOperator& op) {
  const auto j = forced_coordinates(domain_of(op));
  if (!j.empty())
    throw Error(ErrorKind::NotDenselyDefined, op.name() + " forces coordinate " + std::to_string(*j.begin()) + " to vanish");
}
}  // namespace detail

/// Column of entry adjoints; for densely defined entries this is the adjoint of the row.
inline ColOp row_adjoint(const RowOp& r) {
  std::vector<StructuredOperator> out;
  for (const auto& e : r.entries()) {
    detail::require_dense(e);
    out.push_back(formal_adjoint_op(e));
  }
  return ColOp(out);
}

/// Row of entry adjoints; may fail to be densely defined, which is recorded, not rejected.
inline RowOp col_formal_adjoint(const ColOp& c) {
  std::vector<StructuredOperator> out;
  for (const auto& e : c.entries()) out.push_back(formal_adjoint_op(e));
  return RowOp(std::move(out));
}

/// Transposed grid of entry adjoints.
inline OpMatrix matrix_formal_adjoint(const OpMatrix& a) {
  std::vector<std::vector<StructuredOperator>> g(a.cols(), std::vector<StructuredOperator>(a.rows()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      detail::require_dense(a.at(i, j));
      g[j][i] = formal_adjoint_op(a.at(i, j));
    }
  return OpMatrix(std::move(g));
}

inline Composite formal_adjoint(const Composite& c) {
  if (const auto* r = std::get_if<RowOp>(&c)) return row_adjoint(*r);
  if (const auto* col = std::get_if<ColOp>(&c)) return col_formal_adjoint(*col);
  return matrix_formal_adjoint(std::get<OpMatrix>(c));
}

/// Membership predicate on tuples of closed-form sequences.
struct BlockDomain {
  std::size_t arity = 0;
  std::string description;
  std::function<Verdict(const std::vector<SequenceExpr>&)> test;

  Verdict contains(const std::vector<SequenceExpr>& f) const {
    if (f.size() != arity) throw Error(ErrorKind::ShapeMismatch, "block domain arity");
    return test(f);
  }
};

inline BlockDomain block_domain(const OpMatrix& m) {
  std::string desc;
  for (std::size_t j = 0; j < m.cols(); ++j) desc += (j ? " (+) " : "") + m.block_domain(j).to_string();
  return {m.cols(), desc, [ds = m.block_domains()](const std::vector<SequenceExpr>& f) {
            Verdict v = Verdict::Yes;
            for (std::size_t j = 0; j < ds.size(); ++j) v = detail::conj(v, member(f[j], ds[j]));
            return v;
          }};
}

enum class ClosureSide { RowClosure, ColAdjoint, ColFormalAdjoint };

inline std::string_view to_string(ClosureSide s) {
  switch (s) {
    case ClosureSide::RowClosure: return "row_closure";
    case ClosureSide::ColAdjoint: return "col_adjoint";
    case ClosureSide::ColFormalAdjoint: return "col_formal_adjoint";
  }
  return "?";
}

/// Two-block operator written through a closed base B and a bounded factor K:
///   RowClosure        f + g -> B(f + K g),   domain f + K g in D(B)
///   ColAdjoint        f + g -> B(f + K* g),  domain f + K* g in D(B)
///   ColFormalAdjoint  f + g -> B f + B K* g, domain f in D(B) and K* g in D(B)
/// For the column sides B is the adjoint of the first column entry.
class ClosureRep {
 public:
  ClosureRep(StructuredOperator base, StructuredOperator factor, ClosureSide side, bool base_injective)
      : base_(std::move(base)), factor_(std::move(factor)), side_(side), base_injective_(base_injective) {
    moved_ = side_ == ClosureSide::RowClosure ? factor_ : formal_adjoint_op(factor_);
  }

  const StructuredOperator& base() const { return base_; }
  const StructuredOperator& factor() const { return factor_; }
  ClosureSide side() const { return side_; }
  bool base_injective() const { return base_injective_; }

  Verdict contains(const SequenceExpr& f, const SequenceExpr& g) const {
    const DomainDescriptor d = domain_of(base_);
    Verdict v = detail::conj(member(f, DomainDescriptor::all()), member(g, DomainDescriptor::all()));
    const SequenceExpr kg = apply_symbolic(moved_, g);
    if (side_ == ClosureSide::ColFormalAdjoint) return detail::conj(v, detail::conj(member(f, d), member(kg, d)));
    return detail::conj(v, member(f + kg, d));
  }

  BlockDomain domain() const {
    static const char* shapes[] = {"f + Kg in D(B)", "f + K*g in D(B)", "f in D(B), K*g in D(B)"};
    return {2, std::string(shapes[static_cast<int>(side_)]) + ", B = " + base_.name() + ", K = " + factor_.name(),
            [rep = *this](const std::vector<SequenceExpr>& x) { return rep.contains(x[0], x[1]); }};
  }

  AppliedVector apply(const SparseVector& f, const SparseVector& g) const {
    const Verdict v = contains(SequenceExpr(f, {}), SequenceExpr(g, {}));
    if (v == Verdict::No) throw Error(ErrorKind::NotInDomain, f.to_string() + " (+) " + g.to_string());
    if (v == Verdict::Unknown) throw Error(ErrorKind::Undecidable, f.to_string() + " (+) " + g.to_string());
    const AppliedVector kg = apply_formal(moved_, g);
    if (side_ == ClosureSide::ColFormalAdjoint) return apply_formal(base_, f) + apply_formal(base_, kg);
    return apply_formal(base_, AppliedVector(f) + kg);
  }

 private:
  StructuredOperator base_, factor_, moved_;
  ClosureSide side_;
  bool base_injective_;
};

inline constexpr std::size_t kDefaultFactorValidation = 64;

namespace detail {
inline void require_bounded(const StructuredOperator& k) {
  if (is_bounded(k) != Verdict::Yes) throw Error(ErrorKind::NotBounded, k.name() + " is not bounded");
}
}  // namespace detail

/// Closure of row(R1, R2) through a bounded K extending R1^-1 R2 (R1 K = R2 on e_k, k < validation).
inline ClosureRep closure_via_bounded_factor(const StructuredOperator& r1, const StructuredOperator& r2,
                                             const StructuredOperator& k, std::size_t validation = kDefaultFactorValidation) {
  detail::require_bounded(k);
  if (!provably_injective(r1))
    throw Error(ErrorKind::NotInjective, r1.name() + " is not an anchor-free diagonal without zeros");
  for (std::size_t i = 0; i < validation; ++i) {
    const SparseVector ei = SparseVector::unit(i);
    if (!(apply_formal(r1, apply_formal(k, ei)) == apply_formal(r2, ei)))
      throw Error(ErrorKind::FactorCheckFailed, r1.name() + " " + k.name() + " e_" + std::to_string(i) + " != " + r2.name() + " e_" + std::to_string(i));
  }
  return {r1, k, ClosureSide::RowClosure, true};
}

struct ColAdjointReps {
  ClosureRep formal;   // the formal adjoint row
  ClosureRep adjoint;  // the adjoint
};

/// Formal adjoint and adjoint of col(C1, C2) through a bounded K extending C2 C1^-1
/// (K C1 = C2 on e_k, k < validation). Requires D(C1) to be provably inside D(C2).
inline ColAdjointReps col_adjoint_via_bounded_factor(const StructuredOperator& c1, const StructuredOperator& c2,
                                                     const StructuredOperator& k,
                                                     std::size_t validation = kDefaultFactorValidation) {
  detail::require_bounded(k);
  if (!provably_includes(domain_of(c1), domain_of(c2)))
    throw Error(ErrorKind::HypothesisViolated, "D(" + c1.name() + ") is not provably inside D(" + c2.name() + ")");
  for (std::size_t i = 0; i < validation; ++i) {
    const SparseVector ei = SparseVector::unit(i);
    if (!(apply_formal(k, apply_formal(c1, ei)) == apply_formal(c2, ei)))
      throw Error(ErrorKind::FactorCheckFailed, k.name() + " " + c1.name() + " e_" + std::to_string(i) + " != " + c2.name() + " e_" + std::to_string(i));
  }
  const StructuredOperator base = formal_adjoint_op(c1);
  const bool inj = provably_injective(base);
  return {ClosureRep(base, k, ClosureSide::ColFormalAdjoint, inj), ClosureRep(base, k, ClosureSide::ColAdjoint, inj)};
}

template <class T>
struct Certified {
  T adjoint;
  std::string certificate;
};

namespace detail {
inline std::size_t unbounded_count(const OpMatrix& m) {
  std::size_t n = 0;
  for (const auto& row : m.grid())
    for (const auto& e : row) n += is_bounded(e) != Verdict::Yes;
  return n;
}
inline void require_mostly_bounded(const OpMatrix& m) {
  const auto n = unbounded_count(m);
  if (n > 1) throw Error(ErrorKind::NotApplicable, std::to_string(n) + " unbounded entries in " + m.to_string());
}
inline const char* kMostlyBounded = "formal adjoint is the adjoint: at most one unbounded entry";
}  // namespace detail

inline Certified<RowOp> adjoint_when_mostly_bounded(const ColOp& c) {
  detail::require_mostly_bounded(c.matrix());
  return {col_formal_adjoint(c), detail::kMostlyBounded};
}
inline Certified<ColOp> adjoint_when_mostly_bounded(const RowOp& r) {
  detail::require_mostly_bounded(r.matrix());
  return {row_adjoint(r), detail::kMostlyBounded};
}
inline Certified<OpMatrix> adjoint_when_mostly_bounded(const OpMatrix& a) {
  detail::require_mostly_bounded(a);
  return {matrix_formal_adjoint(a), detail::kMostlyBounded};
}

}  // namespace opmx

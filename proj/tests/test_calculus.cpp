#include <gtest/gtest.h>

#include <random>

#include "opmx/calculus.hpp"
#include "test_support.hpp"

using namespace opmx;

namespace {

SparseVector e(std::size_t k, long v = 1) { return SparseVector::unit(k, Scalar(v)); }

StructuredOperator r1() { return StructuredOperator::diagonal("R1", weights::k_pow(2)); }
StructuredOperator r2() { return {"R2", weights::k_pow(2), {{0, weights::k_pow(1)}}}; }
StructuredOperator c1() { return StructuredOperator::diagonal("C1", weights::k_plus(1)); }
StructuredOperator inv() {
  return StructuredOperator::diagonal("K", RationalWeight(Polynomial{Scalar(1)}, Polynomial{Scalar(1), Scalar(1)}));
}
StructuredOperator zero() { return StructuredOperator::zero(); }
StructuredOperator id() { return StructuredOperator::identity(); }

template <class T>
ErrorKind kind_of(T&& fn) {
  try {
    fn();
  } catch (const Error& err) {
    return err.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidInput;
}

// Transposes computed entry by entry from the dense compression, independent of ExactMatrix::transpose.
bool is_transpose(const ExactMatrix& a, const ExactMatrix& b) {
  if (a.rows() != b.cols() || a.cols() != b.rows()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(j, i)) return false;
  return true;
}

}  // namespace

TEST(Assemble, Examples) {
  auto row = std::get<RowOp>(assemble(CompositeKind::Row, {{r1(), r2()}}));
  EXPECT_EQ(row.block_domains(), (std::vector<DomainDescriptor>{domain_of(r1()), domain_of(r2())}));

  auto m = std::get<OpMatrix>(assemble(CompositeKind::Matrix, {{r1(), r2()}, {zero(), zero()}}));
  EXPECT_EQ(m.block_domain(0), domain_of(r1()));
  EXPECT_EQ(m.block_domain(1), domain_of(r2()));

  auto col = std::get<ColOp>(assemble(CompositeKind::Col, {{zero()}}));
  EXPECT_EQ(col.domain(), DomainDescriptor::all());
}

TEST(Assemble, ShapeMismatch) {
  EXPECT_EQ(kind_of([] { assemble(CompositeKind::Matrix, {{r1(), r2()}, {zero()}}); }), ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([] { assemble(CompositeKind::Row, {{r1()}, {r2()}}); }), ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([] { assemble(CompositeKind::Col, {{r1(), r2()}}); }), ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([] { assemble(CompositeKind::Matrix, {}); }), ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([] { OpMatrix::zero(2, 2).apply({e(0)}); }), ErrorKind::ShapeMismatch);
}

TEST(RowAdjoint, Examples) {
  const ColOp adj = row_adjoint(RowOp({r1(), r2()}));
  EXPECT_TRUE(structurally_equal(adj, ColOp({formal_adjoint_op(r1()), formal_adjoint_op(r2())})));
  EXPECT_EQ(adj.matrix().forced(0), (std::set<std::size_t>{0}));
  EXPECT_FALSE(adj.densely_defined());

  EXPECT_TRUE(structurally_equal(row_adjoint(RowOp({c1(), zero()})), ColOp({c1(), zero()})));

  const ExactMatrix rm = RowOp({r1(), r2()}).truncation(Truncation(4));
  ASSERT_EQ(rm.rows(), 4u);
  ASSERT_EQ(rm.cols(), 8u);
  EXPECT_TRUE(is_transpose(rm, adj.truncation(Truncation(4))));
}

TEST(RowAdjoint, RejectsEntriesWithForcedCoordinates) {
  StructuredOperator s("S", weights::one(), {}, {{5, weights::k_pow(1)}});
  EXPECT_EQ(kind_of([&] { row_adjoint(RowOp({r1(), s})); }), ErrorKind::NotDenselyDefined);
}

TEST(ColFormalAdjoint, Examples) {
  const ColOp c({formal_adjoint_op(r1()), formal_adjoint_op(r2())});
  EXPECT_TRUE(structurally_equal(col_formal_adjoint(c), RowOp({r1(), r2()})));
  EXPECT_TRUE(structurally_equal(col_formal_adjoint(ColOp({c1(), -c1()})), RowOp({c1(), -c1()})));
  EXPECT_TRUE(structurally_equal(col_formal_adjoint(ColOp({zero(), zero()})), RowOp({zero(), zero()})));
}

TEST(MatrixFormalAdjoint, Examples) {
  const OpMatrix a({{c1(), zero()}, {-c1(), zero()}});
  const OpMatrix ax = matrix_formal_adjoint(a);
  EXPECT_TRUE(structurally_equal(ax, OpMatrix({{c1(), -c1()}, {zero(), zero()}})));
  EXPECT_TRUE(structurally_equal(matrix_formal_adjoint(ax), a));
  for (std::size_t n : {4u, 64u}) EXPECT_TRUE(is_transpose(a.truncation(Truncation(n)), ax.truncation(Truncation(n))));
  EXPECT_TRUE(structurally_equal(matrix_formal_adjoint(OpMatrix::zero(2, 2)), OpMatrix::zero(2, 2)));
}

TEST(MatrixFormalAdjoint, CaseIIAdjointIsNotDenselyDefined) {
  const OpMatrix a({{r1(), r2()}, {zero(), r2()}});
  EXPECT_TRUE(a.densely_defined());
  const OpMatrix ax = matrix_formal_adjoint(a);
  EXPECT_EQ(ax.forced(0), (std::set<std::size_t>{0}));
  EXPECT_TRUE(ax.forced(1).empty());
  EXPECT_FALSE(ax.densely_defined());
}

TEST(ClosureViaBoundedFactor, Examples) {
  const ClosureRep rep = closure_via_bounded_factor(c1(), id(), inv());
  EXPECT_EQ(rep.apply(e(2), e(5)), AppliedVector(e(2, 3) + e(5)));
  EXPECT_TRUE(rep.base_injective());

  EXPECT_EQ(kind_of([] { closure_via_bounded_factor(c1(), id(), id()); }), ErrorKind::FactorCheckFailed);
  EXPECT_EQ(kind_of([] { closure_via_bounded_factor(c1(), id(), c1()); }), ErrorKind::NotBounded);
  EXPECT_EQ(kind_of([] { closure_via_bounded_factor(r1(), id(), inv()); }), ErrorKind::NotInjective);
}

TEST(ClosureViaBoundedFactor, AgreesWithRawRow) {
  const RowOp row({c1(), id()});
  const ClosureRep rep = closure_via_bounded_factor(c1(), id(), inv());
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = testing_support::random_sparse(rng, 40, 6, 9);
    auto g = testing_support::random_sparse(rng, 40, 6, 9);
    EXPECT_EQ(row.apply({f, g}), rep.apply(f, g));
  }
}

TEST(ColAdjointViaBoundedFactor, Examples) {
  const auto reps = col_adjoint_via_bounded_factor(c1(), id(), inv());
  EXPECT_EQ(reps.formal.apply(e(2), e(5)), AppliedVector(e(2, 3) + e(5)));
  EXPECT_EQ(reps.adjoint.apply(e(2), e(5)), AppliedVector(e(2, 3) + e(5)));
  EXPECT_EQ(reps.formal.side(), ClosureSide::ColFormalAdjoint);
  EXPECT_EQ(reps.adjoint.side(), ClosureSide::ColAdjoint);

  EXPECT_EQ(kind_of([] { col_adjoint_via_bounded_factor(c1(), id(), id()); }), ErrorKind::FactorCheckFailed);
  EXPECT_EQ(kind_of([] { col_adjoint_via_bounded_factor(c1(), id(), r1()); }), ErrorKind::NotBounded);
  // D(I) is not inside D(C1)
  EXPECT_EQ(kind_of([] { col_adjoint_via_bounded_factor(id(), c1(), inv()); }), ErrorKind::HypothesisViolated);
}

TEST(ColAdjointViaBoundedFactor, RepsAgreeWithEachOtherAndWithTheRawFormalAdjoint) {
  const auto reps = col_adjoint_via_bounded_factor(c1(), id(), inv());
  const RowOp raw = col_formal_adjoint(ColOp({c1(), id()}));
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = testing_support::random_sparse(rng, 40, 6, 9);
    auto g = testing_support::random_sparse(rng, 40, 6, 9);
    const auto a = reps.formal.apply(f, g);
    EXPECT_EQ(a, reps.adjoint.apply(f, g));
    EXPECT_EQ(a, raw.apply({f, g}));
  }
}

TEST(ColAdjointViaBoundedFactor, FormalDomainInsideAdjointDomain) {
  const auto reps = col_adjoint_via_bounded_factor(c1(), id(), inv());
  const BlockDomain d1 = reps.formal.domain();
  const BlockDomain d2 = reps.adjoint.domain();
  std::mt19937_64 rng(31);
  int members = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<SequenceExpr> x{testing_support::random_family(rng).expand(), testing_support::random_family(rng).expand()};
    if (d1.contains(x) != Verdict::Yes) continue;
    ++members;
    EXPECT_EQ(d2.contains(x), Verdict::Yes);
  }
  EXPECT_GT(members, 20);
}

TEST(AdjointWhenMostlyBounded, Examples) {
  const auto cert = adjoint_when_mostly_bounded(ColOp({c1(), id()}));
  EXPECT_TRUE(structurally_equal(cert.adjoint, RowOp({c1(), id()})));
  EXPECT_FALSE(cert.certificate.empty());

  const OpMatrix one_corner({{c1(), inv()}, {zero(), id()}});
  EXPECT_TRUE(structurally_equal(adjoint_when_mostly_bounded(one_corner).adjoint, matrix_formal_adjoint(one_corner)));

  EXPECT_EQ(kind_of([] { adjoint_when_mostly_bounded(ColOp({r1(), r2()})); }), ErrorKind::NotApplicable);
  EXPECT_EQ(kind_of([] { adjoint_when_mostly_bounded(RowOp({r1(), r2()})); }), ErrorKind::NotApplicable);
}

TEST(CalculusProperties, RowCompressionTransposeIdentity) {
  const std::vector<RowOp> rows = {RowOp({r1(), r2()}), RowOp({c1(), id()}), RowOp({c1(), zero()}), RowOp({inv(), r1(), c1()})};
  for (const auto& r : rows)
    for (std::size_t n : {4u, 64u, 256u}) {
      const auto fwd = r.truncation(Truncation(n));
      EXPECT_EQ(fwd.rows(), n);
      EXPECT_EQ(fwd.cols(), n * r.size());
      EXPECT_TRUE(is_transpose(fwd, row_adjoint(r).truncation(Truncation(n)))) << r.to_string() << " N=" << n;
    }
}

TEST(CalculusProperties, PairingOnDomains) {
  const std::vector<OpMatrix> mats = {OpMatrix({{r1(), r2()}, {zero(), zero()}}), OpMatrix({{r1(), r2()}, {zero(), r2()}}),
                                      OpMatrix({{c1(), zero()}, {-c1(), zero()}}), OpMatrix({{c1(), inv()}, {zero(), id()}})};
  std::mt19937_64 rng(37);
  for (const auto& a : mats) {
    const OpMatrix ax = matrix_formal_adjoint(a);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
      BlockVector f{testing_support::random_sparse(rng, 10, 4, 7), testing_support::random_sparse(rng, 10, 4, 7)};
      BlockVector g{testing_support::random_sparse(rng, 10, 4, 7), testing_support::random_sparse(rng, 10, 4, 7)};
      if (a.contains(f) != Verdict::Yes || ax.contains(g) != Verdict::Yes) continue;
      ++checked;
      EXPECT_EQ(inner(a.apply(f), g), inner(f, ax.apply(g))) << a.to_string();
    }
    EXPECT_GT(checked, 20) << a.to_string();
  }
}

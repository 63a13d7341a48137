#include <gtest/gtest.h>

#include <random>

#include "opmx/verify.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace opmx;

namespace {

SparseVector e(std::size_t k, long v = 1) { return SparseVector::unit(k, Scalar(v)); }

StructuredOperator r1() { return StructuredOperator::diagonal("R1", weights::k_pow(2)); }
StructuredOperator r2() { return {"R2", weights::k_pow(2), {{0, weights::k_pow(1)}}}; }
StructuredOperator c1() { return StructuredOperator::diagonal("C1", weights::k_plus(1)); }
StructuredOperator zero() { return StructuredOperator::zero(); }

OpMatrix example_one() { return OpMatrix({{r1(), r2()}, {zero(), zero()}}); }

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

WitnessFamily row_witness() {
  WitnessFamily w;
  w.name = "row";
  w.input = [](std::size_t n) {
    return BlockVector{SparseVector::unit(n, Scalar(-1) / n), SparseVector::unit(n, Scalar(1) / n)};
  };
  w.expected_image = [](std::size_t) { return BlockVector{e(0)}; };
  return w;
}

WitnessFamily harmonic_block() {
  WitnessFamily w;
  w.name = "harmonic_block";
  w.claim = WitnessClaim::InputVanishes;
  w.input = [](std::size_t n) {
    std::vector<SparseVector::Entry> x;
    for (std::size_t k = n + 1; k <= 2 * n; ++k) x.emplace_back(k, Scalar(1) / k);
    return BlockVector{SparseVector(std::move(x))};
  };
  w.expected_image = [](std::size_t n) {
    Scalar s(0);
    for (std::size_t k = n + 1; k <= 2 * n; ++k) s += Scalar(1) / k;
    return BlockVector{SparseVector::unit(0, s)};
  };
  w.indices = {64, 256, 1024};
  w.input_bound = 0.13;
  return w;
}

}  // namespace

TEST(CheckPairing, ExampleOneBasisPair) {
  const OpMatrix a = example_one();
  const OpMatrix ax = matrix_formal_adjoint(a);
  const BlockVector f{e(1), e(2)};
  const BlockVector g{e(1), SparseVector{}};
  EXPECT_EQ(inner(a.apply(f), g), Scalar(1));
  EXPECT_EQ(inner(f, ax.apply(g)), Scalar(1));
  EXPECT_EQ(a.apply(f)[0], AppliedVector(e(1) + e(0, 2) + e(2, 4)));
  const auto rep = check_pairing(a, ax, 200, 42);
  EXPECT_EQ(rep.verdict, CheckVerdict::Pass);
  EXPECT_EQ(rep.certificate["samples"], 200);
}

TEST(CheckPairing, ZeroMatrix) {
  const auto rep = check_pairing(OpMatrix::zero(2, 2), OpMatrix::zero(2, 2), 50, 1);
  EXPECT_EQ(rep.verdict, CheckVerdict::Pass);
  EXPECT_EQ(rep.certificate["max_abs_pairing"], "0");
}

TEST(CheckPairing, MutatedPartnerFails) {
  const OpMatrix a = example_one();
  auto grid = matrix_formal_adjoint(a).grid();
  grid[1][0] = -grid[1][0];
  const OpMatrix bad(grid);
  // brute force over basis pairs: some pair separates the two sides
  bool separated = false;
  for (std::size_t i = 1; i < 6 && !separated; ++i)
    for (std::size_t j = 1; j < 6 && !separated; ++j) {
      const BlockVector f{SparseVector{}, e(i)};
      const BlockVector g{e(j), SparseVector{}};
      separated = inner(a.apply(f), g) != inner(f, bad.apply(g));
    }
  ASSERT_TRUE(separated);
  const auto rep = check_pairing(a, bad, 500, 42);
  EXPECT_EQ(rep.verdict, CheckVerdict::Fail);
  EXPECT_NE(rep.certificate["lhs"], rep.certificate["rhs"]);
  EXPECT_TRUE(rep.certificate.contains("f"));
  EXPECT_TRUE(rep.certificate.contains("g"));
}

TEST(CheckPairing, Errors) {
  EXPECT_EQ(kind_of([] { check_pairing(OpMatrix::zero(2, 1), OpMatrix::zero(2, 1), 5, 1); }), ErrorKind::ShapeMismatch);
  // every coordinate forced: no finitely supported sample survives
  std::vector<Anchor> srcs;
  for (std::size_t k = 0; k < 16; ++k) srcs.push_back({k, weights::one()});
  const OpMatrix all_forced({{StructuredOperator("F", weights::one(), {}, srcs)}});
  EXPECT_EQ(kind_of([&] { check_pairing(all_forced, OpMatrix::zero(1, 1), 5, 1); }), ErrorKind::NoValidSamples);
}

TEST(CheckPairing, Deterministic) {
  const OpMatrix a({{r1(), r2()}, {zero(), r2()}});
  const OpMatrix ax = matrix_formal_adjoint(a);
  EXPECT_EQ(check_pairing(a, ax, 100, 7).to_json(), check_pairing(a, ax, 100, 7).to_json());
}

TEST(RunWitness, RowFamilyHasConstantImage) {
  const OpMatrix row = RowOp({r1(), r2()}).matrix();
  const auto rep = run_witness(row, row_witness(), 2000);
  EXPECT_EQ(rep.verdict, CheckVerdict::Pass) << rep.to_json().dump();
  EXPECT_EQ(rep.certificate["tested"], 2000);
  // |input(n)|^2 = 2/n^2
  EXPECT_EQ(rep.certificate["trace"].back()["input_norm_sq"], "1/2000000");
  EXPECT_LE(rep.certificate["last_input_norm"].get<double>(), 1e-3);
}

TEST(RunWitness, TooFewIndicesStayAboveTheBound) {
  const OpMatrix row = RowOp({r1(), r2()}).matrix();
  const auto rep = run_witness(row, row_witness(), 100);
  EXPECT_EQ(rep.verdict, CheckVerdict::Fail);
}

TEST(RunWitness, ColumnShapeIsADomainViolation) {
  const OpMatrix col = row_adjoint(RowOp({r1(), r2()})).matrix();
  EXPECT_EQ(kind_of([&] { run_witness(col, row_witness(), 10); }), ErrorKind::DomainViolation);
}

TEST(RunWitness, WrongImageFails) {
  auto w = row_witness();
  w.expected_image = [](std::size_t) { return BlockVector{e(0, 2)}; };
  EXPECT_EQ(run_witness(RowOp({r1(), r2()}).matrix(), w, 10).verdict, CheckVerdict::Fail);
}

TEST(RunWitness, HarmonicBlockAgainstPartialSums) {
  const OpMatrix c({{StructuredOperator("C1", RationalWeight::zero(), {{0, weights::one()}})}});
  const auto rep = run_witness(c, harmonic_block(), 1024);
  ASSERT_EQ(rep.verdict, CheckVerdict::Pass) << rep.to_json().dump();
  const auto& trace = rep.certificate["trace"];
  ASSERT_EQ(trace.size(), 3u);
  double prev = 1.0;
  for (const auto& t : trace) {
    const std::size_t n = t["n"];
    const double img = t["image_norm"];
    EXPECT_NEAR(img, oracles::harmonic_block(n, 2 * n), 1e-12);
    double sq = 0;
    for (std::size_t k = n + 1; k <= 2 * n; ++k) sq += 1.0 / (double(k) * k);
    EXPECT_NEAR(t["input_norm"].get<double>(), std::sqrt(sq), 1e-12);
    EXPECT_LT(t["input_norm"].get<double>(), prev);
    prev = t["input_norm"];
  }
  // partial-sum values: H_128 - H_64, H_512 - H_256, H_2048 - H_1024
  EXPECT_NEAR(trace[0]["image_norm"].get<double>(), 0.6892562, 1e-7);
  EXPECT_NEAR(trace[1]["image_norm"].get<double>(), 0.6921716, 1e-7);
  EXPECT_NEAR(trace[2]["image_norm"].get<double>(), 0.6929031, 1e-7);
}

TEST(DensenessObstruction, Examples) {
  const auto r = denseness_obstruction(row_adjoint(RowOp({r1(), r2()})).domain());
  EXPECT_EQ(r.verdict, CheckVerdict::Pass);
  EXPECT_EQ(r.certificate["status"], "not_dense");
  EXPECT_EQ(r.certificate["forced"], nlohmann::json::array({0}));

  const auto d = denseness_obstruction(domain_of(r1()));
  EXPECT_EQ(d.verdict, CheckVerdict::Fail);
  EXPECT_EQ(d.certificate["status"], "dense");
  EXPECT_EQ(denseness_obstruction(DomainDescriptor::all()).certificate["status"], "dense");

  const auto u = denseness_obstruction(domain_of(formal_adjoint_op(r2())));
  EXPECT_EQ(u.verdict, CheckVerdict::Undecided);
}

TEST(DensenessObstruction, SoundOnTheCorpus) {
  const std::vector<DomainDescriptor> ds = {row_adjoint(RowOp({r1(), r2()})).domain(),
                                            matrix_formal_adjoint(OpMatrix({{r1(), r2()}, {zero(), r2()}})).block_domain(0),
                                            DomainDescriptor{atoms::CoordinateZero{2}, atoms::WeightedL2{weights::k_pow(1)}}};
  for (const auto& d : ds) {
    const auto r = denseness_obstruction(d);
    ASSERT_EQ(r.verdict, CheckVerdict::Pass);
    for (const auto& f : family_corpus()) {
      if (member(f, d) != Verdict::Yes) continue;
      for (std::size_t j : r.certificate["forced"]) EXPECT_EQ(eval_family(f, j), 0.0) << f.to_string();
    }
  }
}

TEST(CoreCriterion, Examples) {
  const double tol = 1e-10;
  SubspaceSpec full{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, 3};
  SubspaceSpec any{{{1, 2, 3}}, 3};
  EXPECT_EQ(core_criterion(Eigen::MatrixXd::Zero(3, 3), full, any, tol).verdict, CheckVerdict::Pass);

  SubspaceSpec first{{{1, 0, 0}}, 3};
  SubspaceSpec second{{{0, 1, 0}}, 3};
  const auto f = core_criterion(Eigen::MatrixXd::Zero(3, 3), first, second, tol);
  EXPECT_EQ(f.verdict, CheckVerdict::Fail);
  EXPECT_EQ(f.certificate["intersection_dim"], 1);

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  c(0, 0) = 1;
  c(1, 1) = 2;
  const auto p = core_criterion(c, SubspaceSpec{{{1, 0}}, 2}, SubspaceSpec{{{1, 1}}, 2}, tol);
  EXPECT_EQ(p.verdict, CheckVerdict::Pass);
  EXPECT_EQ(p.certificate["dim_w_perp"], 1);
}

TEST(CoreCriterion, Errors) {
  SubspaceSpec dup{{{1, 1}, {2, 2}}, 2};
  SubspaceSpec ok{{{1, 0}}, 2};
  EXPECT_EQ(kind_of([&] { core_criterion(Eigen::MatrixXd::Zero(2, 2), dup, ok, 1e-10); }), ErrorKind::DegenerateInput);
  EXPECT_EQ(kind_of([&] { core_criterion(Eigen::MatrixXd::Zero(3, 3), ok, ok, 1e-10); }), ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([&] { core_criterion(Eigen::MatrixXd::Zero(2, 2), ok, ok, 0.0); }), ErrorKind::InvalidInput);
}

TEST(CoreCriterion, AgreesWithExactOracle) {
  std::mt19937_64 rng(2024);
  int agree = 0, passes = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = testing_support::draw(rng, 1, 6);
    oracles::QMatrix cq(n, std::vector<oracles::Q>(n));
    Eigen::MatrixXd c(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const long v = testing_support::draw(rng, -3, 3);
        cq[i][j] = v;
        c(i, j) = v;
      }
    auto draw_basis = [&](std::size_t dim) {
      while (true) {
        std::vector<std::vector<oracles::Q>> q;
        std::vector<std::vector<double>> d;
        for (std::size_t b = 0; b < dim; ++b) {
          std::vector<oracles::Q> vq(n);
          std::vector<double> vd(n);
          for (std::size_t i = 0; i < n; ++i) {
            const long v = testing_support::draw(rng, -2, 2);
            vq[i] = v;
            vd[i] = v;
          }
          q.push_back(vq);
          d.push_back(vd);
        }
        if (oracles::rank(q) == dim) return std::make_pair(q, SubspaceSpec{d, n});
      }
    };
    const auto [q0, d0] = draw_basis(testing_support::draw(rng, 1, std::min<long>(3, n)));
    const auto [q1, d1] = draw_basis(testing_support::draw(rng, 1, std::min<long>(3, n)));
    const bool oracle = oracles::core_trivial(cq, q0, q1);
    const auto rep = core_criterion(c, d0, d1, 1e-10);
    agree += (rep.verdict == CheckVerdict::Pass) == oracle;
    passes += oracle;
    EXPECT_EQ(rep.verdict == CheckVerdict::Pass, oracle) << "trial " << trial;
  }
  EXPECT_EQ(agree, 200);
  EXPECT_GT(passes, 20);
  EXPECT_LT(passes, 180);
}

TEST(CheckStrictGap, Examples) {
  const auto r = check_strict_gap(c1(), zero(), CoefficientFamily::power_law(1.0), 100);
  EXPECT_EQ(r.verdict, CheckVerdict::Pass) << r.to_json().dump();
  EXPECT_EQ(r.certificate["in_adjoint_domain_of_c1"], "no");
  EXPECT_EQ(r.certificate["in_adjoint_domain_of_t"], "yes");
  EXPECT_EQ(r.certificate["pairings"], 100);
  EXPECT_EQ(r.certificate["max_abs_pairing"], "0");

  const auto f = check_strict_gap(c1(), zero(), CoefficientFamily::unit(3), 10);
  EXPECT_EQ(f.verdict, CheckVerdict::Fail);
  EXPECT_EQ(f.certificate["stage"], "a");
}

TEST(CheckStrictGap, NonzeroTPairsWithItsAdjoint) {
  // T = I: f must lie in D(I) = l2, so p = 1 still works; pairings equal <h, f>
  const auto r = check_strict_gap(c1(), StructuredOperator::identity(), CoefficientFamily::power_law(1.0), 50);
  EXPECT_EQ(r.verdict, CheckVerdict::Pass) << r.to_json().dump();
  EXPECT_NE(r.certificate["max_abs_pairing"], "0");
}

TEST(CheckStrictGap, HypothesisViolated) {
  EXPECT_EQ(kind_of([] { check_strict_gap(StructuredOperator::identity(), c1(), CoefficientFamily::power_law(1.0), 5); }),
            ErrorKind::HypothesisViolated);
}

TEST(CheckInclusion, Examples) {
  const auto reps = col_adjoint_via_bounded_factor(
      c1(), StructuredOperator::identity(),
      StructuredOperator::diagonal("K", RationalWeight(Polynomial{Scalar(1)}, Polynomial{Scalar(1), Scalar(1)})));
  EXPECT_EQ(check_inclusion(reps.formal.domain(), reps.adjoint.domain(), pair_corpus(family_corpus())).verdict, CheckVerdict::Pass);

  std::vector<CoefficientFamily> corpus{CoefficientFamily::power_law(1.0), CoefficientFamily::unit(0)};
  const auto f = check_inclusion(DomainDescriptor::all(), domain_of(r1()), corpus);
  EXPECT_EQ(f.verdict, CheckVerdict::Fail);
  EXPECT_EQ(f.certificate["counter_example"], CoefficientFamily::power_law(1.0).to_string());
  EXPECT_EQ(check_inclusion(domain_of(r2()), domain_of(r2()), family_corpus()).verdict, CheckVerdict::Pass);
}

TEST(VerificationReport, JsonShape) {
  VerificationReport r{"x", CheckVerdict::Fail, CheckVerdict::Pass};
  const auto j = r.to_json();
  EXPECT_EQ(j["verdict"], "fail");
  EXPECT_EQ(j["expected"], "pass");
  EXPECT_EQ(j["match"], false);
  EXPECT_TRUE(j["certificate"].is_object());
  EXPECT_EQ(j["tolerance"], 0.0);
  EXPECT_EQ(parse_check_verdict("undecided"), CheckVerdict::Undecided);
  EXPECT_THROW(parse_check_verdict("maybe"), Error);
}

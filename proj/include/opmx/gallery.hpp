#pragma once

// Canned constructions with expected verdicts: the row example, the four taxonomy
// cases (the third as a discrete summation-by-parts analogue), the strict-gap column
// and the rank-one compression.

#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "opmx/calculus.hpp"
#include "opmx/io.hpp"
#include "opmx/matrix.hpp"
#include "opmx/random.hpp"
#include "opmx/verify.hpp"

namespace opmx {

struct RunParams {
  std::size_t truncation = 64;
  double tol = 1e-10;
  std::size_t samples = 100;
  std::uint64_t seed = 42;
};

struct GalleryCheck {
  std::string name;
  CheckVerdict expected;
  std::function<VerificationReport(const RunParams&)> run;
};

struct GalleryCase {
  std::string name;
  std::string label;  // the statement the case exhibits
  std::string note;   // how the construction realizes it
  std::optional<CompositeKind> kind;
  std::optional<OpMatrix> matrix;  // absent for the discrete case
  std::vector<GalleryCheck> checks;
};

/// Forward difference with left boundary value 0 and its right-boundary partner, h = 1/(N+1).
struct GridDerivativePair {
  std::size_t n;
  ExactMatrix d0, d1;

  explicit GridDerivativePair(std::size_t size) : n(size), d0(size, size), d1(size, size) {
    if (n < 1) throw Error(ErrorKind::InvalidInput, "grid size must be at least 1");
    const Scalar inv_h(static_cast<long long>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
      d0(i, i) = inv_h;
      if (i > 0) d0(i, i - 1) = -inv_h;
      d1(i, i) = -inv_h;
      if (i + 1 < n) d1(i, i + 1) = inv_h;
    }
  }

  /// [[D0, 0], [D1, -D1]]
  ExactMatrix block_matrix() const {
    ExactMatrix m(2 * n, 2 * n);
    m.place(d0, 0, 0);
    m.place(d1, n, 0);
    m.place(-d1, n, n);
    return m;
  }
};

namespace gallery {

inline StructuredOperator r1() { return StructuredOperator::diagonal("R1", weights::k_pow(2)); }
inline StructuredOperator r2() { return {"R2", weights::k_pow(2), {{0, weights::k_pow(1)}}}; }
inline StructuredOperator shift_diag(const std::string& name = "A11") { return StructuredOperator::diagonal(name, weights::k_plus(1)); }
inline StructuredOperator zero() { return StructuredOperator::zero(); }

inline constexpr std::size_t kRowWitnessMax = 10000;

/// f_n = n^-1 e_n entering with opposite signs in the two blocks; image e_0 in block 0.
inline WitnessFamily row_witness(std::size_t image_blocks) {
  WitnessFamily w;
  w.name = "inverse_unit";
  w.input = [](std::size_t n) {
    return BlockVector{SparseVector::unit(n, Scalar(-1) / n), SparseVector::unit(n, Scalar(1) / n)};
  };
  w.expected_image = [image_blocks](std::size_t) {
    BlockVector out(image_blocks);
    out[0] = SparseVector::unit(0);
    return out;
  };
  return w;
}

/// Partial harmonic sums: sum_{k=n+1}^{2n} k^-1 e_k, image (sum of the same weights) e_0.
inline WitnessFamily harmonic_block() {
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

inline VerificationReport named(VerificationReport r, const std::string& name, double tol = 0.0) {
  r.check = name;
  r.tolerance = tol;
  return r;
}

inline VerificationReport pass_if(const std::string& name, bool ok, nlohmann::json certificate) {
  VerificationReport r{name};
  r.verdict = ok ? CheckVerdict::Pass : CheckVerdict::Fail;
  r.certificate = std::move(certificate);
  return r;
}

inline VerificationReport not_checkable(const std::string& name, const std::string& why) {
  VerificationReport r{name};
  r.verdict = CheckVerdict::Undecided;
  r.certificate = {{"status", "not_checkable"}, {"reason", why}};
  return r;
}

// Checks shared with replayed definitions.

inline GalleryCheck pairing_check(const OpMatrix& a, CheckVerdict expected = CheckVerdict::Pass) {
  return {"pairing", expected, [a](const RunParams& p) {
            return named(check_pairing(a, matrix_formal_adjoint(a), p.samples, p.seed), "pairing");
          }};
}

/// Compression of the formal adjoint against the transpose of the compression.
inline VerificationReport truncation_transpose(const Composite& c, std::size_t n) {
  const ExactMatrix a = as_matrix(c).truncation(Truncation(n));
  const ExactMatrix ax = as_matrix(formal_adjoint(c)).truncation(Truncation(n));
  const ExactMatrix at = a.transpose();
  nlohmann::json cert = {{"n", n}, {"rows", ax.rows()}, {"cols", ax.cols()}};
  const bool ok = ax == at;
  if (!ok) cert["first_difference"] = ExactMatrix::first_difference(ax, at);
  return pass_if("truncation_transpose", ok, cert);
}

inline GalleryCheck transpose_check(const Composite& c, CheckVerdict expected = CheckVerdict::Pass) {
  return {"truncation_transpose", expected, [c](const RunParams& p) { return truncation_transpose(c, p.truncation); }};
}

inline std::string adjoint_denseness_name(std::size_t block) { return "adjoint_denseness[" + std::to_string(block) + "]"; }

inline GalleryCheck adjoint_denseness_check(const Composite& c, std::size_t block, CheckVerdict expected) {
  return {adjoint_denseness_name(block), expected, [c, block](const RunParams&) {
            return named(denseness_obstruction(as_matrix(formal_adjoint(c)).block_domain(block)), adjoint_denseness_name(block));
          }};
}

inline GalleryCheck witness_check(const OpMatrix& a, WitnessFamily w, std::size_t nmax) {
  return {"witness", CheckVerdict::Pass, [a, w, nmax](const RunParams&) { return named(run_witness(a, w, nmax), "witness"); }};
}

// Cases.

inline GalleryCase e1_row() {
  const RowOp r({r1(), r2()});
  GalleryCase c{"e1_row", "R = (R1, R2) is not closable", "row of two diagonal operators; R2 also sinks k g_k into e_0",
                CompositeKind::Row, r.matrix(), {}};
  c.checks.push_back(witness_check(r.matrix(), row_witness(1), kRowWitnessMax));
  c.checks.push_back(adjoint_denseness_check(r, 0, CheckVerdict::Pass));
  c.checks.push_back(transpose_check(r));
  c.checks.push_back({"pairing", CheckVerdict::Pass, [r](const RunParams& p) {
                        return named(check_pairing(r.matrix(), row_adjoint(r).matrix(), p.samples, p.seed), "pairing");
                      }});
  return c;
}

inline GalleryCase case_I() {
  const OpMatrix a({{r1(), r2()}, {zero(), zero()}});
  GalleryCase c{"case_I", "A is not closable", "the row example padded with a zero row", CompositeKind::Matrix, a, {}};
  c.checks.push_back(witness_check(a, row_witness(2), kRowWitnessMax));
  c.checks.push_back(pairing_check(a));
  c.checks.push_back(transpose_check(a));
  return c;
}

inline GalleryCase case_II() {
  const OpMatrix a({{r1(), r2()}, {zero(), r2()}});
  GalleryCase c{"case_II", "A is closable and A^x is not densely defined",
                "the row example with R2 repeated below; the adjoint column forces coordinate 0", CompositeKind::Matrix, a, {}};
  c.checks.push_back(adjoint_denseness_check(a, 0, CheckVerdict::Pass));
  c.checks.push_back(pairing_check(a));
  c.checks.push_back({"closability", CheckVerdict::Undecided, [](const RunParams&) {
                        return not_checkable("closability", "closability of A is a limit argument with no finite certificate");
                      }});
  return c;
}

/// Nonzero entries of a dense exact matrix, for repeated products.
struct Nonzeros {
  std::size_t rows = 0;
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> entries;

  explicit Nonzeros(const ExactMatrix& m) : rows(m.rows()) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (m(i, j) != 0) entries.emplace_back(i, j, m(i, j));
  }
  std::vector<Scalar> operator*(const std::vector<Scalar>& x) const {
    std::vector<Scalar> y(rows);
    for (const auto& [i, j, v] : entries) y[i] += v * x[j];
    return y;
  }
};

inline VerificationReport discrete_pairing(const GridDerivativePair& g, std::size_t samples, std::uint64_t seed) {
  const Nonzeros m(g.block_matrix());
  // Formal adjoint: transposed grid of entry transposes.
  ExactMatrix mx(2 * g.n, 2 * g.n);
  mx.place(g.d0.transpose(), 0, 0);
  mx.place(g.d1.transpose(), 0, g.n);
  mx.place((-g.d1).transpose(), g.n, g.n);
  const Nonzeros mxs(mx);
  Rng rng(seed);
  auto draw = [&] {
    std::vector<Scalar> v(2 * g.n);
    for (auto& x : v) x = Scalar(rng.uniform(-9, 9), rng.uniform(1, 4));
    return v;
  };
  auto dot = [](const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
    Scalar s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  for (std::size_t i = 0; i < samples; ++i) {
    const auto f = draw(), h = draw();
    const Scalar lhs = dot(m * f, h), rhs = dot(f, mxs * h);
    if (lhs != rhs) return pass_if("pairing", false, {{"sample", i}, {"lhs", lhs.str()}, {"rhs", rhs.str()}});
  }
  return pass_if("pairing", true, {{"samples", samples}, {"seed", seed}, {"n", g.n}});
}

inline constexpr std::size_t kDiagonalKernelSamples = 50;

/// n == 0 takes the grid size from the run truncation.
inline GalleryCase case_III_discrete(std::size_t n = 0) {
  const std::string name = n == 0 ? "case_III_discrete" : "case_III_discrete(" + std::to_string(n) + ")";
  GalleryCase c{name, "A^x is densely defined but A' != closure(A^x)",
                "[[D0, 0], [D1, -D1]] with D0, D1 forward differences carrying left and right zero boundary values",
                std::nullopt, std::nullopt, {}};
  auto grid = [n](const RunParams& p) { return GridDerivativePair(n == 0 ? p.truncation : n); };
  c.checks.push_back({"transpose_identity", CheckVerdict::Pass, [grid](const RunParams& p) {
                        const auto g = grid(p);
                        const ExactMatrix sum = g.d0.transpose() + g.d1;
                        return pass_if("transpose_identity", sum.is_zero(), {{"n", g.n}, {"h", "1/" + std::to_string(g.n + 1)}});
                      }});
  c.checks.push_back({"diagonal_kernel", CheckVerdict::Pass, [grid](const RunParams& p) {
                        const auto g = grid(p);
                        const Nonzeros m(g.block_matrix());
                        Rng rng(p.seed);
                        for (std::size_t s = 0; s < kDiagonalKernelSamples; ++s) {
                          std::vector<Scalar> ff(2 * g.n);
                          for (std::size_t i = 0; i < g.n; ++i) ff[i] = ff[g.n + i] = Scalar(rng.uniform(-9, 9), rng.uniform(1, 4));
                          const auto y = m * ff;
                          for (std::size_t i = g.n; i < 2 * g.n; ++i)
                            if (y[i] != 0) return pass_if("diagonal_kernel", false, {{"sample", s}, {"row", i}, {"value", y[i].str()}});
                        }
                        return pass_if("diagonal_kernel", true, {{"n", g.n}, {"samples", kDiagonalKernelSamples}});
                      }});
  c.checks.push_back({"pairing", CheckVerdict::Pass, [grid](const RunParams& p) { return discrete_pairing(grid(p), p.samples, p.seed); }});
  c.checks.push_back({"closure_strictness", CheckVerdict::Undecided, [](const RunParams&) {
                        return not_checkable("closure_strictness", "strictness of the closure lives in the Sobolev setting, not at any grid size");
                      }});
  return c;
}

inline GalleryCase case_IV() {
  const OpMatrix a({{shift_diag(), zero()}, {-shift_diag(), zero()}});
  GalleryCase c{"case_IV", "A' = closure(A^x) but A' != A^x", "column (A11, -A11) with A11 = diag(k+1), padded with zeros",
                CompositeKind::Matrix, a, {}};
  c.checks.push_back({"double_adjoint", CheckVerdict::Pass, [a](const RunParams&) {
                        const OpMatrix axx = matrix_formal_adjoint(matrix_formal_adjoint(a));
                        return pass_if("double_adjoint", structurally_equal(axx, a), {{"a", a.to_string()}, {"axx", axx.to_string()}});
                      }});
  c.checks.push_back({"strict_gap", CheckVerdict::Pass, [](const RunParams& p) {
                        return named(check_strict_gap(shift_diag(), zero(), CoefficientFamily::power_law(1), p.samples, p.seed), "strict_gap");
                      }});
  c.checks.push_back(transpose_check(a));
  c.checks.push_back(pairing_check(a));
  return c;
}

inline GalleryCase t1591() {
  const ColOp col({shift_diag("C1"), zero() - shift_diag("C1")});
  GalleryCase c{"t1591", "D(C^x) is strictly inside D(C*)", "C = col(C1, T - C1) with C1 = diag(k+1), T = 0", CompositeKind::Col,
                col.matrix(), {}};
  c.checks.push_back({"strict_gap", CheckVerdict::Pass, [](const RunParams& p) {
                        return named(check_strict_gap(shift_diag("C1"), zero(), CoefficientFamily::power_law(1), p.samples, p.seed), "strict_gap");
                      }});
  c.checks.push_back(transpose_check(col));
  c.checks.push_back(pairing_check(col.matrix()));
  return c;
}

inline GalleryCase remark_col3() {
  const StructuredOperator c1("C1", RationalWeight::zero(), {{0, weights::one()}});
  const OpMatrix a({{c1}});
  GalleryCase c{"remark_col3", "C1 is not closable",
                "C = diag(k+1) compressed onto x = ((k+1)^-1); in the frame of x this is one sink into e_0 with weight 1",
                CompositeKind::Matrix, a, {}};
  c.checks.push_back(witness_check(a, harmonic_block(), 1024));
  c.checks.push_back({"x_outside_adjoint_domain", CheckVerdict::Pass, [](const RunParams&) {
                        const CoefficientFamily x = CoefficientFamily::power_law(1);
                        const Verdict v = member(x, domain_of(formal_adjoint_op(shift_diag("C"))));
                        VerificationReport r{"x_outside_adjoint_domain"};
                        r.verdict = v == Verdict::No ? CheckVerdict::Pass : v == Verdict::Yes ? CheckVerdict::Fail : CheckVerdict::Undecided;
                        r.certificate = {{"x", x.to_string()}, {"member", to_string(v)}};
                        return r;
                      }});
  c.checks.push_back(adjoint_denseness_check(a, 0, CheckVerdict::Pass));
  c.checks.push_back(pairing_check(a));
  return c;
}

}  // namespace gallery

struct CaseSummary {
  std::string name;
  std::string label;
  std::vector<std::pair<std::string, CheckVerdict>> expected;
};

inline const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names{"e1_row", "case_I", "case_II", "case_III_discrete", "case_IV", "t1591", "remark_col3"};
  return names;
}

/// Accepts the listed names; case_III_discrete may carry a fixed grid size, e.g. "case_III_discrete(8)".
inline GalleryCase build_case(const std::string& name) {
  if (name == "e1_row") return gallery::e1_row();
  if (name == "case_I") return gallery::case_I();
  if (name == "case_II") return gallery::case_II();
  if (name == "case_III_discrete") return gallery::case_III_discrete();
  if (name == "case_IV") return gallery::case_IV();
  if (name == "t1591") return gallery::t1591();
  if (name == "remark_col3") return gallery::remark_col3();
  const std::string prefix = "case_III_discrete(";
  if (name.starts_with(prefix) && name.ends_with(")")) {
    const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - 1);
    if (!digits.empty() && digits.size() < 8 && std::all_of(digits.begin(), digits.end(), ::isdigit) && std::stoul(digits) >= 1)
      return gallery::case_III_discrete(std::stoul(digits));
  }
  throw Error(ErrorKind::UnknownCase, "no gallery case named \"" + name + "\"");
}

inline std::vector<CaseSummary> list_cases() {
  std::vector<CaseSummary> out;
  for (const auto& n : case_names()) {
    const GalleryCase c = build_case(n);
    CaseSummary s{n == "case_III_discrete" ? "case_III_discrete(N)" : n, c.label, {}};
    for (const auto& ch : c.checks) s.expected.emplace_back(ch.name, ch.expected);
    out.push_back(std::move(s));
  }
  return out;
}

/// Checks a replayed definition runs; exported expectations are restricted to these.
inline bool replayable_check(const std::string& name) {
  return name == "pairing" || name == "truncation_transpose" || name.starts_with("adjoint_denseness[");
}

inline std::string to_string(CompositeKind k) {
  switch (k) {
    case CompositeKind::Row: return "row";
    case CompositeKind::Col: return "col";
    case CompositeKind::Matrix: return "matrix";
  }
  return "matrix";
}

/// Definition file for the CLI's --define; throws NotRepresentable for the discrete case.
inline nlohmann::json export_case(const GalleryCase& c) {
  if (!c.matrix) throw Error(ErrorKind::NotRepresentable, c.name + " is a finite matrix, not a structured composite");
  nlohmann::json j = io::encode(*c.matrix);
  j["name"] = c.name;
  j["kind"] = to_string(*c.kind);
  nlohmann::json expected = nlohmann::json::object();
  for (const auto& ch : c.checks)
    if (replayable_check(ch.name)) expected[ch.name] = to_string(ch.expected);
  j["expected"] = expected;
  return j;
}

}  // namespace opmx

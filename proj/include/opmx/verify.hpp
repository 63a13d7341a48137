#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "opmx/calculus.hpp"
#include "opmx/corpus.hpp"
#include "opmx/domains.hpp"
#include "opmx/errors.hpp"
#include "opmx/operators.hpp"
#include "opmx/random.hpp"

namespace opmx {

enum class CheckVerdict { Pass, Fail, Undecided };

inline std::string to_string(CheckVerdict v) {
  switch (v) {
    case CheckVerdict::Pass: return "pass";
    case CheckVerdict::Fail: return "fail";
    case CheckVerdict::Undecided: return "undecided";
  }
  return "?";
}

inline CheckVerdict parse_check_verdict(const std::string& s) {
  if (s == "pass") return CheckVerdict::Pass;
  if (s == "fail") return CheckVerdict::Fail;
  if (s == "undecided") return CheckVerdict::Undecided;
  throw Error(ErrorKind::InvalidInput, "verdict must be pass, fail or undecided, got '" + s + "'");
}

struct VerificationReport {
  std::string check;
  CheckVerdict verdict = CheckVerdict::Undecided;
  std::optional<CheckVerdict> expected;
  nlohmann::json certificate = nlohmann::json::object();
  double tolerance = 0.0;  // 0 on the exact path

  bool match() const { return !expected || *expected == verdict; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["check"] = check;
    j["verdict"] = to_string(verdict);
    j["expected"] = expected ? nlohmann::json(to_string(*expected)) : nlohmann::json(nullptr);
    j["match"] = match();
    j["certificate"] = certificate;
    j["tolerance"] = tolerance;
    return j;
  }
};

inline std::string to_string(const BlockVector& f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) s += (i ? " (+) " : "") + f[i].to_string();
  return s;
}

inline std::string to_string(const BlockImage& f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) s += (i ? " (+) " : "") + f[i].to_string();
  return s;
}

// ---------------------------------------------------------------------------
// Pairing

struct SampleShape {
  std::size_t extent = 16;
  std::size_t max_nnz = 4;
  long max_abs = 9;
};

namespace detail {
inline Scalar norm_squared(const BlockVector& f) {
  Scalar acc(0);
  for (const auto& x : f) acc += opmx::norm_squared(x);
  return acc;
}

inline std::vector<std::set<std::size_t>> avoid_sets(const OpMatrix& m) {
  std::vector<std::set<std::size_t>> out;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const DomainDescriptor d = m.block_domain(j);
    auto avoid = blocking_coordinates(d);
    for (auto k : forced_coordinates(d)) avoid.insert(k);
    out.push_back(std::move(avoid));
  }
  return out;
}

inline BlockVector draw_block(Rng& rng, const std::vector<std::set<std::size_t>>& avoid, const SampleShape& s) {
  BlockVector out;
  for (const auto& a : avoid) out.push_back(random_sparse_vector(rng, s.extent, s.max_nnz, s.max_abs, a));
  return out;
}
}  // namespace detail

/// <Af, g> = <f, Bg> on seeded samples f in D(A), g in D(B); exact.
inline VerificationReport check_pairing(const OpMatrix& a, const OpMatrix& b, std::size_t samples, std::uint64_t seed,
                                        SampleShape shape = {}) {
  if (b.rows() != a.cols() || b.cols() != a.rows())
    throw Error(ErrorKind::ShapeMismatch, "pairing needs a " + std::to_string(a.cols()) + "x" + std::to_string(a.rows()) + " partner");
  VerificationReport r{"pairing"};
  const auto avoid_a = detail::avoid_sets(a);
  const auto avoid_b = detail::avoid_sets(b);
  const auto da = a.block_domains();
  const auto db = b.block_domains();
  auto inside = [](const BlockVector& f, const std::vector<DomainDescriptor>& ds) {
    for (std::size_t j = 0; j < ds.size(); ++j)
      if (member(f[j], ds[j]) != Verdict::Yes) return false;
    return true;
  };
  Rng rng(seed);
  std::size_t checked = 0, attempts = 0;
  const std::size_t max_attempts = 20 * std::max<std::size_t>(samples, 1);
  Scalar largest(0);
  while (checked < samples && attempts < max_attempts) {
    ++attempts;
    BlockVector f = detail::draw_block(rng, avoid_a, shape);
    BlockVector g = detail::draw_block(rng, avoid_b, shape);
    if (detail::norm_squared(f) == 0 || detail::norm_squared(g) == 0) continue;
    if (!inside(f, da) || !inside(g, db)) continue;
    BlockImage af, bg;
    try {
      af = a.apply(f);
      bg = b.apply(g);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    const Scalar lhs = inner(af, g);
    const Scalar rhs = inner(f, bg);
    largest = std::max(largest, Scalar(abs(lhs)));
    if (lhs != rhs) {
      r.verdict = CheckVerdict::Fail;
      r.certificate = {{"f", to_string(f)}, {"g", to_string(g)}, {"lhs", opmx::to_string(lhs)}, {"rhs", opmx::to_string(rhs)},
                       {"sample", checked}};
      return r;
    }
  }
  if (checked == 0) throw Error(ErrorKind::NoValidSamples, "no sample pair lies in both domains");
  r.verdict = CheckVerdict::Pass;
  r.certificate = {{"samples", checked}, {"attempts", attempts}, {"seed", seed}, {"max_abs_pairing", opmx::to_string(largest)}};
  return r;
}

// ---------------------------------------------------------------------------
// Witness families

enum class WitnessClaim { InputVanishes, ImageConstant };

struct WitnessFamily {
  std::string name;
  std::function<BlockVector(std::size_t)> input;
  std::function<BlockVector(std::size_t)> expected_image;
  WitnessClaim claim = WitnessClaim::ImageConstant;
  std::vector<std::size_t> indices;  // increasing; empty means 1..nmax
  double input_bound = 1e-3;         // on the norm of the last tested input
};

namespace detail {
inline BlockImage as_image(const BlockVector& f) {
  BlockImage out;
  for (const auto& x : f) out.emplace_back(x);
  return out;
}
}  // namespace detail

/// Pass iff the input norms are nonincreasing down to input_bound and every image
/// equals the expected image exactly (and, for ImageConstant, the expected image does not move).
inline VerificationReport run_witness(const OpMatrix& op, const WitnessFamily& w, std::size_t nmax) {
  std::vector<std::size_t> ns;
  if (w.indices.empty()) {
    for (std::size_t n = 1; n <= nmax; ++n) ns.push_back(n);
  } else {
    std::copy_if(w.indices.begin(), w.indices.end(), std::back_inserter(ns), [&](std::size_t n) { return n <= nmax; });
  }
  if (ns.empty()) throw Error(ErrorKind::InvalidInput, "witness " + w.name + " has no index <= " + std::to_string(nmax));
  const auto ds = op.block_domains();
  VerificationReport r{"witness"};
  nlohmann::json trace = nlohmann::json::array();
  std::optional<Scalar> prev;
  std::optional<BlockVector> first_expected;
  auto fail = [&](const std::string& why, std::size_t n) {
    r.verdict = CheckVerdict::Fail;
    r.certificate = {{"family", w.name}, {"reason", why}, {"n", n}, {"trace", trace}};
    return r;
  };
  for (std::size_t n : ns) {
    const BlockVector f = w.input(n);
    if (f.size() != op.cols())
      throw Error(ErrorKind::DomainViolation, w.name + " at n=" + std::to_string(n) + ": " + std::to_string(f.size()) +
                                                  " blocks for an operator with " + std::to_string(op.cols()));
    for (std::size_t j = 0; j < ds.size(); ++j)
      if (member(f[j], ds[j]) != Verdict::Yes)
        throw Error(ErrorKind::DomainViolation, w.name + " at n=" + std::to_string(n) + ", block " + std::to_string(j));
    const BlockImage image = op.apply_formal(f);
    const BlockVector expected = w.expected_image(n);
    const Scalar nsq = detail::norm_squared(f);
    if (!(image == detail::as_image(expected))) return fail("image " + to_string(image) + " != " + to_string(expected), n);
    if (ns.size() <= 64 || n == ns.front() || n == ns.back())
      trace.push_back({{"n", n}, {"input_norm_sq", opmx::to_string(nsq)}, {"input_norm", std::sqrt(to_double(nsq))},
                       {"image_norm", std::sqrt(to_double(detail::norm_squared(expected)))}});
    if (w.claim == WitnessClaim::ImageConstant) {
      if (!first_expected) first_expected = expected;
      if (!(expected == *first_expected)) return fail("expected image changes with n", n);
    }
    if (prev && nsq > *prev) return fail("input norm increases", n);
    prev = nsq;
  }
  const double last = std::sqrt(to_double(*prev));
  if (last > w.input_bound) return fail("last input norm " + std::to_string(last) + " above bound", ns.back());
  r.verdict = CheckVerdict::Pass;
  r.certificate = {{"family", w.name},           {"claim", w.claim == WitnessClaim::ImageConstant ? "image_constant" : "input_vanishes"},
                   {"tested", ns.size()},        {"last_n", ns.back()},
                   {"last_input_norm", last},    {"input_bound", w.input_bound},
                   {"trace", trace}};
  return r;
}

// ---------------------------------------------------------------------------
// Denseness

/// Pass: forced coordinates found (status not_dense). Fail: every finitely supported
/// vector is admitted and nothing is forced (status dense). Otherwise undecided.
inline VerificationReport denseness_obstruction(const DomainDescriptor& d) {
  VerificationReport r{"denseness_obstruction"};
  const auto forced = forced_coordinates(d);
  r.certificate["descriptor"] = d.to_string();
  if (!forced.empty()) {
    r.verdict = CheckVerdict::Pass;
    r.certificate["status"] = "not_dense";
    r.certificate["forced"] = std::vector<std::size_t>(forced.begin(), forced.end());
  } else if (admits_all_finite(d)) {
    r.verdict = CheckVerdict::Fail;
    r.certificate["status"] = "dense";
  } else {
    r.verdict = CheckVerdict::Undecided;
    r.certificate["status"] = "unknown";
    const auto blocking = blocking_coordinates(d);
    r.certificate["blocking"] = std::vector<std::size_t>(blocking.begin(), blocking.end());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Core criterion at truncation N

struct SubspaceSpec {
  std::vector<std::vector<double>> basis;  // each of length n
  std::size_t n = 0;

  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd m(n, basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j) {
      if (basis[j].size() != n) throw Error(ErrorKind::ShapeMismatch, "basis vector length");
      for (std::size_t i = 0; i < n; ++i) m(i, j) = basis[j][i];
    }
    return m;
  }
};

namespace detail {
inline Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * s(0)) ++r;
  return r;
}

/// Orthonormal basis of the orthogonal complement of range(w) in R^n.
inline Eigen::MatrixXd complement(const Eigen::MatrixXd& w, Eigen::Index n, double tol) {
  if (w.cols() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s.size() > 0 && s(0) > 0)
    while (r < s.size() && s(r) > tol * s(0)) ++r;
  return svd.matrixU().rightCols(n - r);
}
}  // namespace detail

/// Pass iff ((I + C C^T) D0)^perp meets D1 only in 0.
inline VerificationReport core_criterion(const Eigen::MatrixXd& c, const SubspaceSpec& d0, const SubspaceSpec& d1, double tol) {
  const auto n = c.rows();
  if (c.cols() != n || static_cast<Eigen::Index>(d0.n) != n || static_cast<Eigen::Index>(d1.n) != n)
    throw Error(ErrorKind::ShapeMismatch, "core criterion dimensions");
  if (!(tol > 0)) throw Error(ErrorKind::InvalidInput, "tolerance must be positive");
  const Eigen::MatrixXd b0 = d0.matrix(), b1 = d1.matrix();
  if (detail::numerical_rank(b0, tol) != b0.cols()) throw Error(ErrorKind::DegenerateInput, "D0 basis is rank-deficient");
  if (detail::numerical_rank(b1, tol) != b1.cols()) throw Error(ErrorKind::DegenerateInput, "D1 basis is rank-deficient");
  const Eigen::MatrixXd w = (Eigen::MatrixXd::Identity(n, n) + c * c.transpose()) * b0;
  const Eigen::MatrixXd perp = detail::complement(w, n, tol);
  Eigen::MatrixXd joint(n, perp.cols() + b1.cols());
  joint << perp, b1;
  const auto rank = detail::numerical_rank(joint, tol);
  const auto expected = perp.cols() + b1.cols();
  VerificationReport r{"core_criterion"};
  r.tolerance = tol;
  r.verdict = rank == expected ? CheckVerdict::Pass : CheckVerdict::Fail;
  r.certificate = {{"n", n}, {"dim_w_perp", perp.cols()}, {"dim_d1", b1.cols()}, {"joint_rank", rank},
                   {"intersection_dim", expected - rank}};
  return r;
}

// ---------------------------------------------------------------------------
// Domain gaps and inclusions

namespace detail {
inline std::optional<Scalar> inner_exact(const SparseVector& h, const SequenceExpr& f) {
  Scalar acc(0);
  for (const auto& [k, v] : h.entries()) {
    auto fk = f.eval_exact(k);
    if (!fk) return std::nullopt;
    acc += v * *fk;
  }
  return acc;
}

inline std::optional<Scalar> inner_exact(const AppliedVector& a, const SequenceExpr& f) {
  if (a.has_tail() && !f.is_finite()) return std::nullopt;
  if (a.has_tail()) return inner(a, f.finite());
  return inner_exact(a.finite(), f);
}
}  // namespace detail

/// Certifies f (+) f in D(C*) but outside D(C^x) for C = col(C1, T - C1).
inline VerificationReport check_strict_gap(const StructuredOperator& c1, const StructuredOperator& t, const CoefficientFamily& f,
                                           std::size_t samples, std::uint64_t seed = 42) {
  const DomainDescriptor dc1 = domain_of(c1), dt = domain_of(t);
  for (const auto& g : family_corpus())
    if (member(g, dc1) == Verdict::Yes && member(g, dt) == Verdict::No)
      throw Error(ErrorKind::HypothesisViolated, "D(" + c1.name() + ") is not inside D(" + t.name() + "): " + g.to_string());
  VerificationReport r{"strict_gap"};
  const SequenceExpr fe = f.expand();
  const Verdict a = member(fe, domain_of(formal_adjoint_op(c1)));
  const Verdict b = member(fe, domain_of(formal_adjoint_op(t)));
  r.certificate = {{"f", f.to_string()}, {"in_adjoint_domain_of_c1", to_string(a)}, {"in_adjoint_domain_of_t", to_string(b)}};
  if (a != Verdict::No) {
    r.verdict = a == Verdict::Yes ? CheckVerdict::Fail : CheckVerdict::Undecided;
    r.certificate["stage"] = "a";
    return r;
  }
  if (b != Verdict::Yes) {
    r.verdict = b == Verdict::No ? CheckVerdict::Fail : CheckVerdict::Undecided;
    r.certificate["stage"] = "b";
    return r;
  }
  const ColOp col({c1, t - c1});
  const SequenceExpr tf = apply_symbolic(formal_adjoint_op(t), fe);
  Rng rng(seed);
  std::size_t checked = 0;
  Scalar largest(0);
  while (checked < samples) {
    const SparseVector h = random_sparse_vector(rng, 24, 5, 9, blocking_coordinates(dc1));
    if (member(h, dc1) != Verdict::Yes) continue;
    const BlockImage ch = col.apply(h);
    std::optional<Scalar> lhs(Scalar(0));
    for (const auto& part : ch) {
      auto v = detail::inner_exact(part, fe);
      if (!v) {
        lhs.reset();
        break;
      }
      *lhs += *v;
    }
    const auto rhs = detail::inner_exact(h, tf);
    if (!lhs || !rhs) throw Error(ErrorKind::Undecidable, "pairing with " + f.to_string() + " has no exact value");
    ++checked;
    largest = std::max(largest, Scalar(abs(*lhs)));
    if (*lhs != *rhs) {
      r.verdict = CheckVerdict::Fail;
      r.certificate["stage"] = "c";
      r.certificate["h"] = h.to_string();
      r.certificate["lhs"] = opmx::to_string(*lhs);
      r.certificate["rhs"] = opmx::to_string(*rhs);
      return r;
    }
  }
  r.verdict = CheckVerdict::Pass;
  r.certificate["pairings"] = checked;
  r.certificate["max_abs_pairing"] = opmx::to_string(largest);
  return r;
}

inline VerificationReport check_inclusion(const DomainDescriptor& d1, const DomainDescriptor& d2,
                                          const std::vector<CoefficientFamily>& corpus) {
  VerificationReport r{"inclusion"};
  std::size_t undecided = 0, both = 0;
  for (const auto& f : corpus) {
    const Verdict a = member(f, d1), b = member(f, d2);
    if (a == Verdict::Unknown || b == Verdict::Unknown) {
      ++undecided;
      continue;
    }
    if (a == Verdict::Yes && b == Verdict::No) {
      r.verdict = CheckVerdict::Fail;
      r.certificate = {{"counter_example", f.to_string()}, {"d1", d1.to_string()}, {"d2", d2.to_string()}};
      return r;
    }
    both += a == Verdict::Yes;
  }
  r.verdict = CheckVerdict::Pass;
  r.certificate = {{"corpus", corpus.size()}, {"in_both", both}, {"undecided", undecided}};
  return r;
}

/// Block form: corpus entries are tuples of families, one per block.
inline VerificationReport check_inclusion(const BlockDomain& d1, const BlockDomain& d2,
                                          const std::vector<std::vector<CoefficientFamily>>& corpus) {
  VerificationReport r{"inclusion"};
  std::size_t undecided = 0, both = 0;
  for (const auto& tuple : corpus) {
    std::vector<SequenceExpr> x;
    for (const auto& f : tuple) x.push_back(f.expand());
    Verdict a, b;
    try {
      a = d1.contains(x);
      b = d2.contains(x);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotRepresentable) throw;
      ++undecided;
      continue;
    }
    if (a == Verdict::Unknown || b == Verdict::Unknown) {
      ++undecided;
      continue;
    }
    if (a == Verdict::Yes && b == Verdict::No) {
      std::string s;
      for (const auto& f : tuple) s += (s.empty() ? "" : " (+) ") + f.to_string();
      r.verdict = CheckVerdict::Fail;
      r.certificate = {{"counter_example", s}, {"d1", d1.description}, {"d2", d2.description}};
      return r;
    }
    both += a == Verdict::Yes;
  }
  r.verdict = CheckVerdict::Pass;
  r.certificate = {{"corpus", corpus.size()}, {"in_both", both}, {"undecided", undecided}};
  return r;
}

/// All ordered pairs of corpus families.
inline std::vector<std::vector<CoefficientFamily>> pair_corpus(const std::vector<CoefficientFamily>& corpus) {
  std::vector<std::vector<CoefficientFamily>> out;
  for (const auto& f : corpus)
    for (const auto& g : corpus) out.push_back({f, g});
  return out;
}

}  // namespace opmx

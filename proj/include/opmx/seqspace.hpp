#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "opmx/errors.hpp"
#include "opmx/scalar.hpp"
#include "opmx/weight.hpp"

namespace opmx {

/// Finitely supported real sequence: sorted indices, no stored zeros.
class SparseVector {
 public:
  using Entry = std::pair<std::size_t, Scalar>;

  SparseVector() = default;
  explicit SparseVector(std::vector<Entry> entries) : e_(std::move(entries)) { canonicalize(); }
  SparseVector(std::initializer_list<Entry> entries) : e_(entries) { canonicalize(); }

  static SparseVector unit(std::size_t k, Scalar value = Scalar(1)) { return SparseVector({{k, std::move(value)}}); }

  const std::vector<Entry>& entries() const { return e_; }
  bool empty() const { return e_.empty(); }
  std::size_t nnz() const { return e_.size(); }
  /// One past the largest stored index; 0 when empty.
  std::size_t extent() const { return e_.empty() ? 0 : e_.back().first + 1; }

  Scalar at(std::size_t k) const {
    auto it = std::lower_bound(e_.begin(), e_.end(), k, [](const Entry& a, std::size_t b) { return a.first < b; });
    return (it != e_.end() && it->first == k) ? it->second : Scalar(0);
  }

  SparseVector truncated(std::size_t n) const {
    std::vector<Entry> out;
    for (const auto& [k, v] : e_)
      if (k < n) out.emplace_back(k, v);
    return SparseVector(std::move(out));
  }

  friend SparseVector operator+(const SparseVector& a, const SparseVector& b) {
    std::vector<Entry> out;
    out.reserve(a.e_.size() + b.e_.size());
    out.insert(out.end(), a.e_.begin(), a.e_.end());
    out.insert(out.end(), b.e_.begin(), b.e_.end());
    return SparseVector(std::move(out));
  }
  friend SparseVector operator*(const Scalar& s, const SparseVector& a) {
    if (s == 0) return {};
    std::vector<Entry> out(a.e_);
    for (auto& [k, v] : out) v *= s;
    return SparseVector(std::move(out));
  }
  friend SparseVector operator-(const SparseVector& a) { return Scalar(-1) * a; }
  friend SparseVector operator-(const SparseVector& a, const SparseVector& b) { return a + (-b); }
  friend bool operator==(const SparseVector& a, const SparseVector& b) { return a.e_ == b.e_; }

  std::string to_string() const {
    if (e_.empty()) return "0";
    std::string s;
    for (const auto& [k, v] : e_) {
      if (!s.empty()) s += " + ";
      s += "(" + v.str() + ")e" + std::to_string(k);
    }
    return s;
  }

 private:
  void canonicalize() {
    std::stable_sort(e_.begin(), e_.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    std::vector<Entry> out;
    out.reserve(e_.size());
    for (auto& entry : e_) {
      if (!out.empty() && out.back().first == entry.first) {
        out.back().second += entry.second;
      } else {
        out.push_back(std::move(entry));
      }
    }
    std::erase_if(out, [](const Entry& x) { return x.second == 0; });
    e_ = std::move(out);
  }

  std::vector<Entry> e_;
};

inline Scalar inner(const SparseVector& u, const SparseVector& v) {
  Scalar acc(0);
  auto a = u.entries().begin(), ae = u.entries().end();
  auto b = v.entries().begin(), be = v.entries().end();
  while (a != ae && b != be) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      acc += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return acc;
}

inline Scalar norm_squared(const SparseVector& u) { return inner(u, u); }
inline double norm(const SparseVector& u) { return std::sqrt(to_double(norm_squared(u))); }

enum class Sign { AllPlus, Alternating };

/// sigma_k: +1, or (-1)^k with sigma_0 = +1.
inline int sign_at(Sign s, std::size_t k) { return (s == Sign::Alternating && (k % 2 == 1)) ? -1 : 1; }

inline bool is_integral(double p) { return std::isfinite(p) && std::floor(p) == p && std::abs(p) < 1e9; }

struct Truncation {
  std::size_t n;
  explicit Truncation(std::size_t size) : n(size) {
    if (n < 1) throw Error(ErrorKind::InvalidInput, "truncation must be at least 1");
  }
};

/// One infinite term  mult(k) * sigma_k * (k + offset)^(-p)  of a sequence expression.
struct PowerTerm {
  RationalWeight mult;
  double p = 0.0;
  Sign sign = Sign::AllPlus;
  long offset = 1;

  double eval(std::size_t k) const {
    return mult.eval_double(static_cast<double>(k)) * sign_at(sign, k) *
           std::pow(static_cast<double>(k) + static_cast<double>(offset), -p);
  }
  std::optional<Scalar> eval_exact(std::size_t k) const {
    if (!is_integral(p)) return std::nullopt;
    return mult.eval(k) * Scalar(sign_at(sign, k)) *
           ipow(Scalar(static_cast<long>(k) + offset), -static_cast<long>(p));
  }
};

/// Normal form of a closed-form sequence: finite part plus infinite power-law terms.
/// Terms with equal (p, sign, offset) are merged; zero terms are dropped.
class SequenceExpr {
 public:
  SequenceExpr() = default;
  SequenceExpr(SparseVector finite, std::vector<PowerTerm> terms) : finite_(std::move(finite)), terms_(std::move(terms)) {
    merge();
  }

  const SparseVector& finite() const { return finite_; }
  const std::vector<PowerTerm>& terms() const { return terms_; }
  bool is_finite() const { return terms_.empty(); }

  double eval(std::size_t k) const {
    double acc = to_double(finite_.at(k));
    for (const auto& t : terms_) acc += t.eval(k);
    return acc;
  }
  std::optional<Scalar> eval_exact(std::size_t k) const {
    Scalar acc = finite_.at(k);
    for (const auto& t : terms_) {
      auto v = t.eval_exact(k);
      if (!v) return std::nullopt;
      acc += *v;
    }
    return acc;
  }

  /// Pointwise product with a weight.
  SequenceExpr times(const RationalWeight& w) const {
    std::vector<SparseVector::Entry> fin;
    for (const auto& [k, v] : finite_.entries()) fin.emplace_back(k, v * w.eval(k));
    std::vector<PowerTerm> ts;
    for (const auto& t : terms_) ts.push_back({w * t.mult, t.p, t.sign, t.offset});
    return {SparseVector(std::move(fin)), std::move(ts)};
  }

  friend SequenceExpr operator+(const SequenceExpr& a, const SequenceExpr& b) {
    std::vector<PowerTerm> ts(a.terms_);
    ts.insert(ts.end(), b.terms_.begin(), b.terms_.end());
    return {a.finite_ + b.finite_, std::move(ts)};
  }
  friend SequenceExpr operator*(const Scalar& s, const SequenceExpr& a) {
    std::vector<PowerTerm> ts;
    if (s != 0)
      for (const auto& t : a.terms_) ts.push_back({s * t.mult, t.p, t.sign, t.offset});
    return {s * a.finite_, std::move(ts)};
  }

 private:
  void merge() {
    std::vector<PowerTerm> out;
    for (auto& t : terms_) {
      if (t.offset < 1) throw Error(ErrorKind::InvalidInput, "power-law offset must be >= 1");
      if (!std::isfinite(t.p)) throw Error(ErrorKind::InvalidInput, "power-law exponent must be finite");
      auto it = std::find_if(out.begin(), out.end(), [&](const PowerTerm& o) {
        return o.p == t.p && o.sign == t.sign && o.offset == t.offset;
      });
      if (it == out.end()) {
        out.push_back(std::move(t));
      } else {
        it->mult = it->mult + t.mult;
      }
    }
    std::erase_if(out, [](const PowerTerm& t) { return t.mult.is_zero(); });
    terms_ = std::move(out);
  }

  SparseVector finite_;
  std::vector<PowerTerm> terms_;
};

/// Closed-form coefficient family: finite support, signed power law
/// sigma_k (k + offset)^(-p), and finite linear combinations of those.
class CoefficientFamily {
 public:
  struct FiniteSupport {
    SparseVector vec;
  };
  struct PowerLaw {
    double p;
    Sign sign;
    long offset;
  };
  struct Scaled {
    Scalar by;
    std::shared_ptr<const CoefficientFamily> of;
  };
  struct Sum {
    std::vector<CoefficientFamily> terms;
  };
  using Node = std::variant<FiniteSupport, PowerLaw, Scaled, Sum>;

  CoefficientFamily() : node_(FiniteSupport{}) {}

  static CoefficientFamily finite(SparseVector v) { return CoefficientFamily(FiniteSupport{std::move(v)}); }
  static CoefficientFamily unit(std::size_t k) { return finite(SparseVector::unit(k)); }
  static CoefficientFamily power_law(double p, Sign sign = Sign::AllPlus, long offset = 1) {
    if (offset < 1) throw Error(ErrorKind::InvalidInput, "power-law offset must be >= 1");
    if (!std::isfinite(p)) throw Error(ErrorKind::InvalidInput, "power-law exponent must be finite");
    return CoefficientFamily(PowerLaw{p, sign, offset});
  }
  static CoefficientFamily scaled(Scalar by, CoefficientFamily of) {
    return CoefficientFamily(Scaled{std::move(by), std::make_shared<const CoefficientFamily>(std::move(of))});
  }
  static CoefficientFamily sum(std::vector<CoefficientFamily> terms) { return CoefficientFamily(Sum{std::move(terms)}); }

  const Node& node() const { return node_; }

  SequenceExpr expand() const {
    return std::visit(
        [](const auto& n) -> SequenceExpr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, FiniteSupport>) {
            return {n.vec, {}};
          } else if constexpr (std::is_same_v<T, PowerLaw>) {
            return {SparseVector{}, {PowerTerm{weights::one(), n.p, n.sign, n.offset}}};
          } else if constexpr (std::is_same_v<T, Scaled>) {
            return n.by * n.of->expand();
          } else {
            SequenceExpr acc;
            for (const auto& t : n.terms) acc = acc + t.expand();
            return acc;
          }
        },
        node_);
  }

  std::string to_string() const {
    return std::visit(
        [](const auto& n) -> std::string {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, FiniteSupport>) {
            return n.vec.to_string();
          } else if constexpr (std::is_same_v<T, PowerLaw>) {
            std::string s = n.sign == Sign::Alternating ? "(-1)^k " : "";
            std::ostringstream os;
            os << s << "(k+" << n.offset << ")^-" << n.p;
            return os.str();
          } else if constexpr (std::is_same_v<T, Scaled>) {
            return n.by.str() + "*[" + n.of->to_string() + "]";
          } else {
            std::string s;
            for (const auto& t : n.terms) s += (s.empty() ? "" : " + ") + t.to_string();
            return "(" + (s.empty() ? std::string("0") : s) + ")";
          }
        },
        node_);
  }

 private:
  explicit CoefficientFamily(Node node) : node_(std::move(node)) {}
  Node node_;
};

inline double eval_family(const CoefficientFamily& f, std::size_t k) { return f.expand().eval(k); }
inline std::optional<Scalar> eval_family_exact(const CoefficientFamily& f, std::size_t k) { return f.expand().eval_exact(k); }

/// Coordinates k < N of the family; exact where the closed form is rational,
/// otherwise the double value converted exactly.
inline SparseVector truncate_expr(const SequenceExpr& e, Truncation t) {
  std::vector<SparseVector::Entry> out;
  for (std::size_t k = 0; k < t.n; ++k) {
    if (auto v = e.eval_exact(k)) {
      out.emplace_back(k, std::move(*v));
    } else {
      out.emplace_back(k, from_double(e.eval(k)));
    }
  }
  return SparseVector(std::move(out));
}

inline SparseVector truncate_family(const CoefficientFamily& f, Truncation t) {
  const SequenceExpr e = f.expand();
  if (e.is_finite()) return e.finite().truncated(t.n);
  return truncate_expr(e, t);
}

}  // namespace opmx

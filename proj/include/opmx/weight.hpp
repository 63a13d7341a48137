#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "opmx/errors.hpp"
#include "opmx/scalar.hpp"

namespace opmx {

/// Polynomial in the index variable k with exact rational coefficients,
/// stored lowest degree first and trimmed (no trailing zero coefficients).
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Scalar> coeffs) : c_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<Scalar> coeffs) : c_(coeffs) { trim(); }

  static Polynomial constant(Scalar c) { return Polynomial({std::move(c)}); }
  static Polynomial monomial(Scalar c, std::size_t degree) {
    std::vector<Scalar> v(degree + 1);
    v[degree] = std::move(c);
    return Polynomial(std::move(v));
  }

  bool is_zero() const { return c_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const Scalar& leading() const { return c_.back(); }
  const std::vector<Scalar>& coeffs() const { return c_; }
  Scalar coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Scalar(0); }

  Scalar eval(const Scalar& k) const {
    Scalar acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * k + *it;
    return acc;
  }
  double eval_double(double k) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * k + to_double(*it);
    return acc;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Scalar> out(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.coeff(i) + b.coeff(i);
    return Polynomial(std::move(out));
  }
  friend Polynomial operator-(const Polynomial& a) {
    std::vector<Scalar> out(a.c_);
    for (auto& x : out) x = -x;
    return Polynomial(std::move(out));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Scalar> out(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(out));
  }
  friend Polynomial operator*(const Scalar& s, const Polynomial& a) {
    std::vector<Scalar> out(a.c_);
    for (auto& x : out) x *= s;
    return Polynomial(std::move(out));
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

  /// Euclidean division; divisor must be nonzero.
  static std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
    if (b.is_zero()) throw Error(ErrorKind::InvalidInput, "polynomial division by zero");
    std::vector<Scalar> rem(a.c_);
    if (a.degree() < b.degree()) return {Polynomial{}, a};
    std::vector<Scalar> quot(static_cast<std::size_t>(a.degree() - b.degree() + 1));
    for (int i = a.degree() - b.degree(); i >= 0; --i) {
      const Scalar q = rem[static_cast<std::size_t>(i + b.degree())] / b.leading();
      quot[static_cast<std::size_t>(i)] = q;
      if (q == 0) continue;
      for (int j = 0; j <= b.degree(); ++j)
        rem[static_cast<std::size_t>(i + j)] -= q * b.c_[static_cast<std::size_t>(j)];
    }
    return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
  }

  static Polynomial gcd(Polynomial a, Polynomial b) {
    while (!b.is_zero()) {
      auto r = divmod(a, b).second;
      a = std::move(b);
      b = std::move(r);
    }
    if (a.is_zero()) return a;
    return (Scalar(1) / a.leading()) * a;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
      const Scalar& c = c_[static_cast<std::size_t>(i)];
      if (c == 0) continue;
      Scalar mag = c < 0 ? Scalar(-c) : c;
      if (first) {
        if (c < 0) os << "-";
      } else {
        os << (c < 0 ? "-" : "+");
      }
      first = false;
      const bool unit = (mag == 1);
      if (i == 0) {
        os << mag.str();
      } else {
        if (!unit) os << mag.str() << "*";
        os << "k";
        if (i > 1) os << "^" << i;
      }
    }
    return os.str();
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Scalar> c_;
};

/// Rational function of the index k, w(k) = num(k)/den(k), with den(k) != 0 for
/// every integer k >= 0. Used for diagonal entries, anchor weights and domain weights.
class RationalWeight {
 public:
  RationalWeight() : num_(), den_(Polynomial::constant(1)) {}
  RationalWeight(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw Error(ErrorKind::InvalidInput, "weight denominator is zero");
    check_denominator();
    normalize();
  }
  explicit RationalWeight(Polynomial num) : RationalWeight(std::move(num), Polynomial::constant(1)) {}

  static RationalWeight zero() { return {}; }
  static RationalWeight constant(Scalar c) { return RationalWeight(Polynomial::constant(std::move(c))); }
  /// c * k^d
  static RationalWeight monomial(Scalar c, std::size_t d) { return RationalWeight(Polynomial::monomial(std::move(c), d)); }
  /// c * (k + offset)^(-p) for integer p (negative p gives a polynomial).
  static RationalWeight shifted_power(Scalar c, long offset, long p) {
    Polynomial base({Scalar(offset), Scalar(1)});
    Polynomial pw = Polynomial::constant(1);
    for (long i = 0; i < (p < 0 ? -p : p); ++i) pw = pw * base;
    if (p >= 0) return {Polynomial::constant(std::move(c)), pw};
    return RationalWeight(std::move(c) * pw);
  }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  /// Growth degree deg(num) - deg(den); nullopt for the zero weight.
  std::optional<int> degree() const {
    if (is_zero()) return std::nullopt;
    return num_.degree() - den_.degree();
  }
  /// Coefficient c of the leading asymptotic term c * k^degree.
  Scalar leading_coefficient() const {
    if (is_zero()) return Scalar(0);
    return num_.leading() / den_.leading();
  }
  /// (w(k))_k is square summable.
  bool in_l2() const { return is_zero() || *degree() <= -1; }
  bool is_bounded_sequence() const { return is_zero() || *degree() <= 0; }
  std::optional<Scalar> as_constant() const {
    if (is_zero()) return Scalar(0);
    if (num_.degree() == 0 && den_.degree() == 0) return num_.leading() / den_.leading();
    return std::nullopt;
  }

  Scalar eval(std::size_t k) const { return num_.eval(Scalar(k)) / den_.eval(Scalar(k)); }
  double eval_double(double k) const { return num_.eval_double(k) / den_.eval_double(k); }

  /// True when w(k) != 0 for every integer k >= 0.
  bool nonvanishing() const {
    if (is_zero()) return false;
    return !has_nonnegative_integer_root(num_);
  }

  friend RationalWeight operator+(const RationalWeight& a, const RationalWeight& b) {
    if (a.den_ == b.den_) return {a.num_ + b.num_, a.den_};
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend RationalWeight operator-(const RationalWeight& a) { return {-a.num_, a.den_}; }
  friend RationalWeight operator-(const RationalWeight& a, const RationalWeight& b) { return a + (-b); }
  friend RationalWeight operator*(const RationalWeight& a, const RationalWeight& b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
  }
  friend RationalWeight operator*(const Scalar& s, const RationalWeight& a) { return {s * a.num_, a.den_}; }
  /// Division by a weight with no zeros at k >= 0.
  friend RationalWeight operator/(const RationalWeight& a, const RationalWeight& b) {
    if (!b.nonvanishing()) throw Error(ErrorKind::InvalidInput, "division by a weight that vanishes at some k >= 0");
    return {a.num_ * b.den_, a.den_ * b.num_};
  }
  /// Equality as functions of k.
  friend bool operator==(const RationalWeight& a, const RationalWeight& b) {
    return a.num_ * b.den_ == b.num_ * a.den_;
  }

  std::string to_string() const {
    if (den_.degree() == 0 && den_.leading() == 1) return num_.to_string();
    return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
  }

 private:
  static bool has_nonnegative_integer_root(const Polynomial& p) {
    if (p.is_zero()) return true;
    if (p.degree() == 0) return false;
    // Cauchy bound: every real root satisfies |r| < 1 + max |a_i / a_n|.
    Scalar bound(0);
    for (int i = 0; i < p.degree(); ++i) {
      Scalar r = p.coeff(static_cast<std::size_t>(i)) / p.leading();
      if (r < 0) r = -r;
      bound = std::max(bound, r);
    }
    bound += 1;
    const double limit = to_double(bound);
    if (limit > 1e7) throw Error(ErrorKind::InvalidInput, "weight coefficients too large for root scan");
    for (long k = 0; static_cast<double>(k) <= limit; ++k)
      if (p.eval(Scalar(k)) == 0) return true;
    return false;
  }

  void check_denominator() const {
    if (has_nonnegative_integer_root(den_))
      throw Error(ErrorKind::InvalidInput, "weight denominator vanishes at some k >= 0: " + den_.to_string());
  }

  void normalize() {
    if (num_.is_zero()) {
      den_ = Polynomial::constant(1);
      return;
    }
    if (den_.degree() > 0 && num_.degree() > 0) {
      Polynomial g = Polynomial::gcd(num_, den_);
      if (g.degree() > 0) {
        num_ = Polynomial::divmod(num_, g).first;
        den_ = Polynomial::divmod(den_, g).first;
      }
    }
    const Scalar lead = den_.leading();
    if (lead != 1) {
      num_ = (Scalar(1) / lead) * num_;
      den_ = (Scalar(1) / lead) * den_;
    }
  }

  Polynomial num_;
  Polynomial den_;
};

inline std::ostream& operator<<(std::ostream& os, const RationalWeight& w) { return os << w.to_string(); }

namespace weights {
inline RationalWeight k_pow(std::size_t d) { return RationalWeight::monomial(Scalar(1), d); }
/// k + c
inline RationalWeight k_plus(long c) { return RationalWeight(Polynomial({Scalar(c), Scalar(1)})); }
inline RationalWeight one() { return RationalWeight::constant(Scalar(1)); }
}  // namespace weights

}  // namespace opmx

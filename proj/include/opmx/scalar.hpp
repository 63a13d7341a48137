#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "opmx/errors.hpp"

namespace opmx {

/// Exact rational scalar used for every finitely supported computation.
using Scalar = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Scalar& s) { return s.convert_to<double>(); }

/// Exact dyadic rational equal to the given double.
inline Scalar from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::InvalidInput, "non-finite scalar");
  return Scalar(x);
}

inline bool is_zero(const Scalar& s) { return s == 0; }

inline bool is_integer(const Scalar& s) {
  return boost::multiprecision::denominator(s) == 1;
}

inline std::string to_string(const Scalar& s) { return s.str(); }

/// Decimal integer with optional sign. cpp_int's own string constructor reads a
/// leading 0 as octal, so digits are validated and leading zeros stripped here.
inline BigInt parse_decimal_integer(const std::string& t) {
  std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
  if (i == t.size() || t.find_first_not_of("0123456789", i) != std::string::npos)
    throw Error(ErrorKind::InvalidInput, "bad integer '" + t + "'");
  const bool negative = t[0] == '-';
  const std::size_t first = std::min(t.find_first_not_of('0', i), t.size() - 1);
  BigInt v(t.substr(first));
  return negative ? BigInt(-v) : v;
}

/// Parses "3", "-7/2" or a decimal literal like "0.25" exactly.
inline Scalar parse_scalar(std::string_view text) {
  std::string t(text);
  if (t.empty()) throw Error(ErrorKind::InvalidInput, "empty scalar");
  try {
    if (auto slash = t.find('/'); slash != std::string::npos) {
      BigInt num = parse_decimal_integer(t.substr(0, slash));
      BigInt den = parse_decimal_integer(t.substr(slash + 1));
      if (den == 0) throw Error(ErrorKind::InvalidInput, "zero denominator in '" + t + "'");
      return Scalar(num, den);
    }
    auto dot = t.find('.');
    if (dot == std::string::npos && t.find_first_of("eE") == std::string::npos) {
      return Scalar(parse_decimal_integer(t));
    }
    if (t.find_first_of("eE") != std::string::npos) return from_double(std::stod(t));
    std::string digits = t.substr(0, dot) + t.substr(dot + 1);
    BigInt num = parse_decimal_integer(digits);
    BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(t.size() - dot - 1));
    return Scalar(num, den);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidInput, "bad scalar '" + t + "'");
  }
}

/// base^exp for a (possibly negative) integer exponent.
inline Scalar ipow(const Scalar& base, long exp) {
  if (exp < 0) {
    if (base == 0) throw Error(ErrorKind::InvalidInput, "zero to a negative power");
    return Scalar(1) / ipow(base, -exp);
  }
  Scalar result(1), b = base;
  auto e = static_cast<unsigned long>(exp);
  while (e) {
    if (e & 1u) result *= b;
    e >>= 1u;
    if (e) b *= b;
  }
  return result;
}

}  // namespace opmx

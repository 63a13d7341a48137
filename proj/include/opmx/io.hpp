#pragma once

// JSON encodings of weights, families, descriptors, operators and operator grids.
// Decoders raise InvalidInput with the path of the offending field.

#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"
#include "opmx/calculus.hpp"
#include "opmx/domains.hpp"
#include "opmx/errors.hpp"
#include "opmx/operators.hpp"
#include "opmx/seqspace.hpp"
#include "opmx/weight.hpp"

namespace opmx::io {

using nlohmann::json;

namespace detail {

[[noreturn]] inline void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::InvalidInput, path + ": " + what);
}

/// Error text without its kind prefix, for re-wrapping under a field path.
inline std::string reason(const Error& e) {
  const std::string w = e.what();
  const std::string prefix = std::string(to_string(e.kind())) + ": ";
  return w.starts_with(prefix) ? w.substr(prefix.size()) : w;
}

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(path + "." + key, "missing");
  return *it;
}

inline std::size_t index(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) bad(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array");
  return j;
}

}  // namespace detail

inline json encode(const Scalar& s) {
  if (is_integer(s)) {
    const BigInt n = boost::multiprecision::numerator(s);
    if (n >= std::numeric_limits<long long>::min() && n <= std::numeric_limits<long long>::max())
      return n.convert_to<long long>();
  }
  return s.str();
}

inline Scalar decode_scalar(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Scalar(j.get<long long>());
  if (j.is_number_float()) return from_double(j.get<double>());
  if (j.is_string()) {
    try {
      return parse_scalar(j.get<std::string>());
    } catch (const Error& e) {
      detail::bad(path, detail::reason(e));
    }
  }
  detail::bad(path, "expected a number or a rational string");
}

// Weights: {"num": [c0, c1, ...], "den": [d0, ...]}, coefficients from k^0 upwards; "den" defaults to [1].

inline json encode(const Polynomial& p) {
  json a = json::array();
  for (const auto& c : p.coeffs()) a.push_back(encode(c));
  return a;
}

inline json encode(const RationalWeight& w) { return {{"num", encode(w.num())}, {"den", encode(w.den())}}; }

inline Polynomial decode_polynomial(const json& j, const std::string& path) {
  if (j.is_number() || j.is_string()) return Polynomial{decode_scalar(j, path)};
  detail::array(j, path);
  std::vector<Scalar> c;
  for (std::size_t i = 0; i < j.size(); ++i) c.push_back(decode_scalar(j[i], path + "[" + std::to_string(i) + "]"));
  return Polynomial(std::move(c));
}

inline RationalWeight decode_weight(const json& j, const std::string& path) {
  if (j.is_number() || j.is_string()) return RationalWeight::constant(decode_scalar(j, path));
  const Polynomial num = decode_polynomial(detail::field(j, "num", path), path + ".num");
  const Polynomial den = j.contains("den") ? decode_polynomial(j["den"], path + ".den") : Polynomial{Scalar(1)};
  if (den.is_zero()) detail::bad(path + ".den", "zero denominator");
  try {
    return RationalWeight(num, den);
  } catch (const Error& e) {
    detail::bad(path + ".den", detail::reason(e));
  }
}

// Families.

inline json encode(const SparseVector& v) {
  json a = json::array();
  for (const auto& [k, x] : v.entries()) a.push_back({k, encode(x)});
  return a;
}

inline SparseVector decode_sparse(const json& j, const std::string& path) {
  detail::array(j, path);
  std::vector<SparseVector::Entry> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2) detail::bad(p, "expected [index, value]");
    out.emplace_back(detail::index(j[i][0], p + "[0]"), decode_scalar(j[i][1], p + "[1]"));
  }
  return SparseVector(std::move(out));
}

inline json encode(const CoefficientFamily& f) {
  return std::visit(
      [](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CoefficientFamily::FiniteSupport>) {
          return {{"kind", "finite"}, {"entries", encode(n.vec)}};
        } else if constexpr (std::is_same_v<T, CoefficientFamily::PowerLaw>) {
          return {{"kind", "powerlaw"}, {"p", n.p}, {"sign", n.sign == Sign::AllPlus ? "all_plus" : "alternating"}, {"offset", n.offset}};
        } else if constexpr (std::is_same_v<T, CoefficientFamily::Scaled>) {
          return {{"kind", "scaled"}, {"by", encode(n.by)}, {"of", encode(*n.of)}};
        } else {
          json a = json::array();
          for (const auto& t : n.terms) a.push_back(encode(t));
          return {{"kind", "sum"}, {"terms", a}};
        }
      },
      f.node());
}

inline std::string kind_of(const json& j, const std::string& path) {
  const json& k = detail::field(j, "kind", path);
  if (!k.is_string()) detail::bad(path + ".kind", "expected a string");
  return k.get<std::string>();
}

inline CoefficientFamily decode_family(const json& j, const std::string& path) {
  const std::string kind = kind_of(j, path);
  if (kind == "finite") return CoefficientFamily::finite(decode_sparse(detail::field(j, "entries", path), path + ".entries"));
  if (kind == "unit") return CoefficientFamily::unit(detail::index(detail::field(j, "k", path), path + ".k"));
  if (kind == "powerlaw") {
    const json& pj = detail::field(j, "p", path);
    if (!pj.is_number() || !std::isfinite(pj.get<double>())) detail::bad(path + ".p", "expected a finite number");
    Sign sign = Sign::AllPlus;
    if (j.contains("sign")) {
      const std::string s = j["sign"].is_string() ? j["sign"].get<std::string>() : "";
      if (s == "alternating") {
        sign = Sign::Alternating;
      } else if (s != "all_plus") {
        detail::bad(path + ".sign", "expected \"all_plus\" or \"alternating\"");
      }
    }
    long offset = 1;
    if (j.contains("offset")) {
      if (!j["offset"].is_number_integer() || j["offset"].get<long>() < 1) detail::bad(path + ".offset", "expected an integer >= 1");
      offset = j["offset"].get<long>();
    }
    return CoefficientFamily::power_law(pj.get<double>(), sign, offset);
  }
  if (kind == "scaled")
    return CoefficientFamily::scaled(decode_scalar(detail::field(j, "by", path), path + ".by"),
                                     decode_family(detail::field(j, "of", path), path + ".of"));
  if (kind == "sum") {
    const std::string p = path + ".terms";
    const json& v = detail::array(detail::field(j, "terms", path), p);
    std::vector<CoefficientFamily> terms;
    for (std::size_t i = 0; i < v.size(); ++i) terms.push_back(decode_family(v[i], p + "[" + std::to_string(i) + "]"));
    return CoefficientFamily::sum(std::move(terms));
  }
  detail::bad(path + ".kind", "unknown family kind \"" + kind + "\"");
}

// Descriptors: an array of atoms, each {"kind": ..., ...}.

inline json encode(const DomainAtom& a) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, atoms::All>) {
          return {{"kind", "all"}};
        } else if constexpr (std::is_same_v<T, atoms::WeightedL2>) {
          return {{"kind", "weighted_l2"}, {"weight", encode(x.weight)}};
        } else if constexpr (std::is_same_v<T, atoms::SeriesConverges>) {
          return {{"kind", "series_converges"}, {"weight", encode(x.weight)}};
        } else if constexpr (std::is_same_v<T, atoms::ResidualL2>) {
          json s = json::array();
          for (const auto& c : x.sources) s.push_back({{"from", c.coord}, {"weight", encode(c.weight)}});
          return {{"kind", "residual_l2"}, {"diag", encode(x.diag)}, {"sources", s}};
        } else {
          return {{"kind", "coordinate_zero"}, {"coord", x.coord}};
        }
      },
      a);
}

inline json encode(const DomainDescriptor& d) {
  json a = json::array();
  for (const auto& x : d.atoms()) a.push_back(encode(x));
  return a;
}

inline DomainDescriptor decode_descriptor(const json& j, const std::string& path) {
  detail::array(j, path);
  std::vector<DomainAtom> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json& a = j[i];
    const std::string kind = kind_of(a, p);
    if (kind == "all") {
      out.emplace_back(atoms::All{});
    } else if (kind == "weighted_l2") {
      out.emplace_back(atoms::WeightedL2{decode_weight(detail::field(a, "weight", p), p + ".weight")});
    } else if (kind == "series_converges") {
      out.emplace_back(atoms::SeriesConverges{decode_weight(detail::field(a, "weight", p), p + ".weight")});
    } else if (kind == "residual_l2") {
      std::vector<SourceColumn> cols;
      const json& s = detail::array(detail::field(a, "sources", p), p + ".sources");
      for (std::size_t k = 0; k < s.size(); ++k) {
        const std::string r = p + ".sources[" + std::to_string(k) + "]";
        cols.push_back({detail::index(detail::field(s[k], "from", r), r + ".from"),
                        decode_weight(detail::field(s[k], "weight", r), r + ".weight")});
      }
      out.emplace_back(atoms::ResidualL2{decode_weight(detail::field(a, "diag", p), p + ".diag"), std::move(cols)});
    } else if (kind == "coordinate_zero") {
      out.emplace_back(atoms::CoordinateZero{detail::index(detail::field(a, "coord", p), p + ".coord")});
    } else {
      detail::bad(p + ".kind", "unknown atom kind \"" + kind + "\"");
    }
  }
  return DomainDescriptor(std::move(out));
}

// Operators.

inline json encode(const StructuredOperator& op) {
  if (structurally_equal(op, StructuredOperator::zero())) return "zero";
  json sinks = json::array(), sources = json::array();
  for (const auto& a : op.sinks()) sinks.push_back({{"target", a.coord}, {"weight", encode(a.weight)}});
  for (const auto& a : op.sources()) sources.push_back({{"from", a.coord}, {"weight", encode(a.weight)}});
  return {{"name", op.name()}, {"diag", encode(op.diag())}, {"sinks", sinks}, {"sources", sources}};
}

inline StructuredOperator decode_operator(const json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "zero") return StructuredOperator::zero();
    detail::bad(path, "the only string operator is \"zero\"");
  }
  if (!j.is_object()) detail::bad(path, "expected an operator object or \"zero\"");
  std::string name = "op";
  if (j.contains("name")) {
    if (!j["name"].is_string()) detail::bad(path + ".name", "expected a string");
    name = j["name"].get<std::string>();
  }
  const RationalWeight diag = j.contains("diag") ? decode_weight(j["diag"], path + ".diag") : RationalWeight::zero();
  auto anchors = [&](const char* key, const char* coord) {
    std::vector<Anchor> out;
    if (!j.contains(key)) return out;
    const std::string p = path + "." + key;
    const json& a = detail::array(j[key], p);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string q = p + "[" + std::to_string(i) + "]";
      out.push_back({detail::index(detail::field(a[i], coord, q), q + "." + coord), decode_weight(detail::field(a[i], "weight", q), q + ".weight")});
    }
    return out;
  };
  auto sinks = anchors("sinks", "target");
  auto sources = anchors("sources", "from");
  try {
    return {name, diag, std::move(sinks), std::move(sources)};
  } catch (const Error& e) {
    detail::bad(path, detail::reason(e));
  }
}

inline json encode(const OpMatrix& m) {
  json grid = json::array();
  for (const auto& row : m.grid()) {
    json r = json::array();
    for (const auto& op : row) r.push_back(encode(op));
    grid.push_back(r);
  }
  return {{"grid", grid}};
}

inline OpMatrix decode_matrix(const json& j, const std::string& path) {
  const std::string p = path + ".grid";
  const json& g = detail::array(detail::field(j, "grid", path), p);
  if (g.empty()) detail::bad(p, "empty grid");
  std::vector<std::vector<StructuredOperator>> grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::string q = p + "[" + std::to_string(i) + "]";
    const json& row = detail::array(g[i], q);
    if (row.size() != g[0].size()) detail::bad(q, "row length " + std::to_string(row.size()) + " differs from " + std::to_string(g[0].size()));
    std::vector<StructuredOperator> r;
    for (std::size_t k = 0; k < row.size(); ++k) r.push_back(decode_operator(row[k], q + "[" + std::to_string(k) + "]"));
    grid.push_back(std::move(r));
  }
  try {
    return OpMatrix(std::move(grid));
  } catch (const Error& e) {
    detail::bad(p, detail::reason(e));
  }
}

}  // namespace opmx::io

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opmx {

enum class ErrorKind {
  NotInDomain,
  Undecidable,
  NotRepresentable,
  ShapeMismatch,
  NotDenselyDefined,
  FactorCheckFailed,
  NotBounded,
  NotInjective,
  NotApplicable,
  NoValidSamples,
  DomainViolation,
  DegenerateInput,
  HypothesisViolated,
  UnknownCase,
  InvalidInput,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotInDomain: return "NotInDomain";
    case ErrorKind::Undecidable: return "Undecidable";
    case ErrorKind::NotRepresentable: return "NotRepresentable";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotDenselyDefined: return "NotDenselyDefined";
    case ErrorKind::FactorCheckFailed: return "FactorCheckFailed";
    case ErrorKind::NotBounded: return "NotBounded";
    case ErrorKind::NotInjective: return "NotInjective";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::NoValidSamples: return "NoValidSamples";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::UnknownCase: return "UnknownCase";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

/// Single exception type for the library; the kind says which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace opmx

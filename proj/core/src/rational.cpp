#include "hkb/rational.hpp"

#include "hkb/error.hpp"

namespace hkb {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::NonDominant: return "NonDominant";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::ExtractionFailed: return "ExtractionFailed";
    case ErrorCode::ExceptionalCaseUnsupported: return "ExceptionalCaseUnsupported";
    case ErrorCode::ResolutionCapExceeded: return "ResolutionCapExceeded";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::OutsideHull: return "OutsideHull";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::PrecisionLoss: return "PrecisionLoss";
    case ErrorCode::RoundingFailed: return "RoundingFailed";
    case ErrorCode::TableIncomplete: return "TableIncomplete";
    case ErrorCode::OutsideRegime: return "OutsideRegime";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::OutOfStrip: return "OutOfStrip";
    case ErrorCode::TailBoundFailed: return "TailBoundFailed";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw Error(ErrorCode::InvalidParameters, "empty rational literal");
  auto dot = s.find('.');
  try {
    if (dot == std::string::npos) {
      Rational r(s, 10);
      r.canonicalize();
      if (r.get_den() == 0) throw Error(ErrorCode::InvalidParameters, "zero denominator in '" + s + "'");
      return r;
    }
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    Integer num(digits, 10);
    Integer den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    Rational r(num, den);
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::InvalidParameters, "not a rational literal: '" + s + "'");
  }
}

std::string to_string(const Rational& x) {
  if (x.get_den() == 1) return x.get_num().get_str();
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

Rational rational_pow(const Rational& base, long exponent) {
  Rational result = 1;
  Rational b = exponent >= 0 ? base : Rational(1) / base;
  unsigned long e = exponent >= 0 ? exponent : -exponent;
  while (e) {
    if (e & 1u) result *= b;
    b *= b;
    e >>= 1u;
  }
  return result;
}

bool is_integer(const Rational& x) { return x.get_den() == 1; }

}  // namespace hkb

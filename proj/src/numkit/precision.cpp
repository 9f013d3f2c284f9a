#include "soliton_forge/numkit/precision.hpp"

#include <string>

#include "soliton_forge/error.hpp"

namespace soliton_forge::numkit {

std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::binary64: return "binary64";
    case Precision::binary128: return "binary128";
    case Precision::decimal50: return "decimal50";
    case Precision::decimal100: return "decimal100";
    case Precision::decimal300: return "decimal300";
  }
  return "unknown";
}

int decimal_digits(Precision p) {
  switch (p) {
    case Precision::binary64: return 15;
    case Precision::binary128: return 33;
    case Precision::decimal50: return 50;
    case Precision::decimal100: return 100;
    case Precision::decimal300: return 300;
  }
  return 0;
}

Precision precision_for_digits(double digits) {
  for (Precision p : {Precision::binary64, Precision::binary128, Precision::decimal50,
                      Precision::decimal100, Precision::decimal300}) {
    if (digits <= decimal_digits(p)) return p;
  }
  throw Error(ErrorCode::exponent_overflow,
              "requested " + std::to_string(digits) + " digits exceeds the widest precision tier");
}

}  // namespace soliton_forge::numkit

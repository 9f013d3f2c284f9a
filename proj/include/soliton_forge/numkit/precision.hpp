#pragma once

#include <boost/multiprecision/float128.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <string_view>
#include <type_traits>

namespace soliton_forge::numkit {

using Quad = boost::multiprecision::float128;
using Mp50 = boost::multiprecision::mpfr_float_50;
using Mp100 = boost::multiprecision::mpfr_float_100;
using Mp300 = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<300>>;

/// Working precision tiers. Kernel matrices built from exp(-k x) lose roughly
/// 2 * max(exponent) * log10(e) decimal digits, so very negative x needs more
/// than binary64 to keep the answer meaningful.
enum class Precision { binary64, binary128, decimal50, decimal100, decimal300 };

std::string_view to_string(Precision p);

/// Decimal digits carried by a tier.
int decimal_digits(Precision p);

/// Cheapest tier that carries at least `digits` decimal digits.
/// Throws Error(exponent_overflow) beyond the widest tier.
Precision precision_for_digits(double digits);

/// Calls f(std::type_identity<T>{}) with the scalar type of tier p.
template <class F>
decltype(auto) with_precision(Precision p, F&& f) {
  switch (p) {
    case Precision::binary64: return f(std::type_identity<double>{});
    case Precision::binary128: return f(std::type_identity<Quad>{});
    case Precision::decimal50: return f(std::type_identity<Mp50>{});
    case Precision::decimal100: return f(std::type_identity<Mp100>{});
    case Precision::decimal300: break;
  }
  return f(std::type_identity<Mp300>{});
}

}  // namespace soliton_forge::numkit

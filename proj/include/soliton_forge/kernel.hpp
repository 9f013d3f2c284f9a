#pragma once

// Nystrom kernel of the Dyson determinant at one (x, t), templated on the
// working scalar.
//
// With nodes k_i, signed weights w_i and g_i = -k_i x + 4 k_i^3 t, put
// v_i = sqrt|w_i| e^{g_i}, B_ij = v_i v_j / (k_i + k_j), S = diag(sign w_i).
// Then det(I + K) = det(I + B S) = det(S) det(S + B), so the system actually
// factored is M = S + B. It is symmetric, equals I + B for nonnegative
// weights, and keeps the sign of the tau function for signed ones.
//
// M is stored balanced: M_ij = e^{o_i + o_j} a_ij with o_i = max(0, log(B_ii) / 2).

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "soliton_forge/error.hpp"
#include "soliton_forge/numkit/linalg.hpp"

namespace soliton_forge {

/// Largest admissible 2 g_i before a (x, t) request is rejected.
inline constexpr double kExponentGuard = 600.0;

struct KernelBounds {
  double max_two_g = 0.0;   // max_i 2 g_i
  double max_offset = 0.0;  // max_i o_i
  double sum_offsets = 0.0;
};

/// Cheap double-precision pass over the exponents, used for the overflow guard
/// and to pick a working precision.
inline KernelBounds kernel_bounds(std::span<const double> k, std::span<const double> w, double x, double t) {
  KernelBounds b;
  b.max_two_g = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double g = -k[i] * x + 4.0 * k[i] * k[i] * k[i] * t;
    b.max_two_g = std::max(b.max_two_g, 2 * g);
    if (w[i] == 0) continue;
    const double o = std::max(0.0, 0.5 * (std::log(std::abs(w[i])) + 2 * g - std::log(2 * k[i])));
    b.max_offset = std::max(b.max_offset, o);
    b.sum_offsets += o;
  }
  if (k.empty()) b.max_two_g = 0.0;
  return b;
}

template <class T>
struct KernelSystem {
  std::vector<T> k;
  std::vector<int> sign;
  std::vector<T> v;  // balanced v_i e^{-o_i}
  numkit::SymmetricMatrix<T> a;
  bool has_negative = false;

  std::size_t size() const { return k.size(); }

  /// B_ij = v_i v_j / (k_i + k_j), the weighted kernel entry without the signature.
  T entry(std::size_t i, std::size_t j) const {
    using std::exp;
    return exp(a.log_offset(i) + a.log_offset(j)) * v[i] * v[j] / (k[i] + k[j]);
  }
};

template <class T>
KernelSystem<T> assemble_kernel(std::span<const double> nodes, std::span<const double> weights, const T& x, const T& t) {
  using std::exp;
  using std::log;
  using std::sqrt;
  const std::size_t n = nodes.size();
  KernelSystem<T> ks;
  ks.k.resize(n);
  ks.sign.resize(n);
  ks.v.resize(n);
  ks.a = numkit::SymmetricMatrix<T>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T k = T(nodes[i]);
    const T g = -k * x + 4 * k * k * k * t;
    if (static_cast<double>(2 * g) > kExponentGuard)
      throw Error(ErrorCode::exponent_overflow, "kernel exponent 2g = " + std::to_string(static_cast<double>(2 * g)) +
                                                    " exceeds " + std::to_string(kExponentGuard));
    ks.k[i] = k;
    ks.sign[i] = weights[i] < 0 ? -1 : 1;
    ks.has_negative = ks.has_negative || weights[i] < 0;
    T o(0);
    if (weights[i] != 0) {
      const T log_bii = log(T(std::abs(weights[i]))) + 2 * g - log(2 * k);
      if (log_bii > 0) o = log_bii / 2;
      ks.v[i] = sqrt(T(std::abs(weights[i]))) * exp(g - o);
    } else {
      ks.v[i] = T(0);
    }
    ks.a.set_log_offset(i, o);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      T e = ks.v[i] * ks.v[j] / (ks.k[i] + ks.k[j]);
      if (i == j) e += ks.sign[i] * exp(-2 * ks.a.log_offset(i));
      ks.a.set(i, j, e);
    }
  }
  return ks;
}

/// Tau function and the rank-one trace formula at one point.
template <class T>
struct PointEval {
  T log_abs_tau{0};
  int sign = 1;
  T q{0};  // -4 <k v, M^-1 v> + 2 <v, M^-1 v>^2
  bool singular = false;
};

template <class T>
PointEval<T> evaluate_kernel(const KernelSystem<T>& ks) {
  PointEval<T> r;
  const std::size_t n = ks.size();
  if (n == 0) return r;
  std::vector<T> y;
  if (!ks.has_negative) {
    try {
      numkit::CholeskyFactor<T> ch(ks.a);
      if (!ch.singular()) {
        r.log_abs_tau = ch.log_det();
        y = ch.solve_scaled(ks.v);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::not_positive_definite) throw;
    }
  }
  if (y.empty()) {
    numkit::LuFactor<T> lu(ks.a);
    if (lu.singular()) {
      r.singular = true;
      r.sign = 0;
      return r;
    }
    r.log_abs_tau = lu.log_abs_det();
    r.sign = lu.sign();
    for (int s : ks.sign) r.sign *= s;
    y = lu.solve_scaled(ks.v);
  }
  T vp(0), kvp(0);
  for (std::size_t i = 0; i < n; ++i) {
    vp += ks.v[i] * y[i];
    kvp += ks.k[i] * ks.v[i] * y[i];
  }
  r.q = -4 * kvp + 2 * vp * vp;
  return r;
}

}  // namespace soliton_forge

#pragma once

// Dense factorizations for the small (n <~ 200) kernel systems. Everything is a
// template over the scalar so the same code runs in binary64 and in the
// extended tiers of precision.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "soliton_forge/error.hpp"

namespace soliton_forge::numkit {

/// Symmetric matrix M_ij = exp(o_i + o_j) * a_ij with a stored once per pair
/// (packed lower triangle), so symmetry holds by construction. The log offsets
/// o_i let entries far outside double range be represented without overflow.
template <class T>
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : n_(n), packed_(n * (n + 1) / 2, T(0)), offsets_(n, T(0)) {}

  static SymmetricMatrix identity(std::size_t n) {
    SymmetricMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, T(1));
    return m;
  }

  std::size_t size() const { return n_; }

  /// Stored (offset-free) entry a_ij.
  const T& scaled(std::size_t i, std::size_t j) const { return packed_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, const T& value) { packed_[index(i, j)] = value; }

  const T& log_offset(std::size_t i) const { return offsets_[i]; }
  void set_log_offset(std::size_t i, const T& o) { offsets_[i] = o; }
  std::span<const T> log_offsets() const { return offsets_; }

  /// Materialized entry exp(o_i + o_j) * a_ij.
  T entry(std::size_t i, std::size_t j) const {
    using std::exp;
    return exp(offsets_[i] + offsets_[j]) * scaled(i, j);
  }

  T max_abs_scaled() const {
    using std::abs;
    T m(0);
    for (const T& v : packed_) m = std::max<T>(m, abs(v));
    return m;
  }

  /// Row-major dense copy of the stored entries a_ij.
  std::vector<T> dense_scaled() const {
    std::vector<T> d(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j <= i; ++j) d[i * n_ + j] = d[j * n_ + i] = scaled(i, j);
    return d;
  }

 private:
  static std::size_t index(std::size_t i, std::size_t j) {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }

  std::size_t n_ = 0;
  std::vector<T> packed_;
  std::vector<T> offsets_;
};

/// Cholesky factorization with diagonal pivoting, P A P^T = L L^T, of the stored
/// matrix A of a SymmetricMatrix. Pivots below -1e-10 * max|a_ij| mean the
/// matrix is genuinely indefinite; pivots in [-tol, tol] mean it is singular
/// to working precision.
template <class T>
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const SymmetricMatrix<T>& m)
      : n_(m.size()), l_(m.dense_scaled()), perm_(n_), offsets_(m.log_offsets().begin(), m.log_offsets().end()) {
    using std::sqrt;
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    const T tol = T(1e-10) * m.max_abs_scaled();
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < n_; ++i)
        if (l_[i * n_ + i] > l_[p * n_ + p]) p = i;
      if (p != k) swap_symmetric(k, p);
      const T d = l_[k * n_ + k];
      if (d < -tol) throw Error(ErrorCode::not_positive_definite, "negative Cholesky pivot");
      if (d <= tol) {
        rank_deficient_ = true;
        return;
      }
      const T r = sqrt(d);
      l_[k * n_ + k] = r;
      for (std::size_t i = k + 1; i < n_; ++i) l_[i * n_ + k] /= r;
      // Full trailing update keeps the block symmetric for later pivot swaps.
      for (std::size_t i = k + 1; i < n_; ++i) {
        const T lik = l_[i * n_ + k];
        for (std::size_t j = k + 1; j < n_; ++j) l_[i * n_ + j] -= lik * l_[j * n_ + k];
      }
    }
  }

  std::size_t size() const { return n_; }
  bool singular() const { return rank_deficient_; }

  /// log det M including the log offsets; -inf when singular.
  T log_det() const {
    using std::log;
    if (rank_deficient_) return -std::numeric_limits<double>::infinity();
    T s(0);
    for (std::size_t k = 0; k < n_; ++k) s += 2 * log(l_[k * n_ + k]) + 2 * offsets_[k];
    return s;
  }

  /// Solves A y = rhs for the stored (offset-free) matrix.
  std::vector<T> solve_scaled(std::span<const T> rhs) const {
    if (rank_deficient_) throw Error(ErrorCode::singular_determinant, "Cholesky solve of a singular matrix");
    std::vector<T> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = rhs[perm_[i]];
    for (std::size_t i = 0; i < n_; ++i) {
      T s = y[i];
      for (std::size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * y[k];
      y[i] = s / l_[i * n_ + i];
    }
    for (std::size_t i = n_; i-- > 0;) {
      T s = y[i];
      for (std::size_t k = i + 1; k < n_; ++k) s -= l_[k * n_ + i] * y[k];
      y[i] = s / l_[i * n_ + i];
    }
    std::vector<T> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
    return x;
  }

  /// Solves M x = rhs, M = D A D with D = diag(exp(o)).
  std::vector<T> solve(std::span<const T> rhs) const {
    using std::exp;
    std::vector<T> b(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n_; ++i) b[i] *= exp(-offsets_[i]);
    auto x = solve_scaled(b);
    for (std::size_t i = 0; i < n_; ++i) x[i] *= exp(-offsets_[i]);
    return x;
  }

 private:
  void swap_symmetric(std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < n_; ++j) std::swap(l_[a * n_ + j], l_[b * n_ + j]);
    for (std::size_t i = 0; i < n_; ++i) std::swap(l_[i * n_ + a], l_[i * n_ + b]);
    std::swap(perm_[a], perm_[b]);
  }

  std::size_t n_;
  std::vector<T> l_;
  std::vector<std::size_t> perm_;
  std::vector<T> offsets_;
  bool rank_deficient_ = false;
};

/// LU factorization with partial pivoting of a dense n x n matrix
/// M_ij = exp(o_i + o_j) * a_ij (offsets optional).
template <class T>
class LuFactor {
 public:
  LuFactor(std::size_t n, std::vector<T> row_major, std::vector<T> offsets = {})
      : n_(n), lu_(std::move(row_major)), perm_(n), offsets_(std::move(offsets)) {
    using std::abs;
    if (offsets_.empty()) offsets_.assign(n_, T(0));
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    norm1_ = T(0);
    for (std::size_t j = 0; j < n_; ++j) {
      T col(0);
      for (std::size_t i = 0; i < n_; ++i) col += abs(lu_[i * n_ + j]);
      norm1_ = std::max<T>(norm1_, col);
    }
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < n_; ++i)
        if (abs(lu_[i * n_ + k]) > abs(lu_[p * n_ + k])) p = i;
      if (lu_[p * n_ + k] == 0) {
        singular_ = true;
        return;
      }
      if (p != k) {
        for (std::size_t j = 0; j < n_; ++j) std::swap(lu_[k * n_ + j], lu_[p * n_ + j]);
        std::swap(perm_[k], perm_[p]);
        swaps_ ^= 1;
      }
      const T pivot = lu_[k * n_ + k];
      for (std::size_t i = k + 1; i < n_; ++i) {
        const T f = lu_[i * n_ + k] / pivot;
        lu_[i * n_ + k] = f;
        if (f == 0) continue;
        for (std::size_t j = k + 1; j < n_; ++j) lu_[i * n_ + j] -= f * lu_[k * n_ + j];
      }
    }
  }

  explicit LuFactor(const SymmetricMatrix<T>& m)
      : LuFactor(m.size(), m.dense_scaled(), std::vector<T>(m.log_offsets().begin(), m.log_offsets().end())) {}

  std::size_t size() const { return n_; }
  bool singular() const { return singular_; }

  /// log |det M| including offsets.
  T log_abs_det() const {
    using std::abs;
    using std::log;
    if (singular_) return -std::numeric_limits<double>::infinity();
    T s(0);
    for (std::size_t k = 0; k < n_; ++k) s += log(abs(lu_[k * n_ + k])) + 2 * offsets_[k];
    return s;
  }

  /// Sign of det M (0 when singular).
  int sign() const {
    if (singular_) return 0;
    int s = swaps_ ? -1 : 1;
    for (std::size_t k = 0; k < n_; ++k)
      if (lu_[k * n_ + k] < 0) s = -s;
    return s;
  }

  std::vector<T> solve_scaled(std::span<const T> rhs) const {
    require_regular();
    std::vector<T> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = rhs[perm_[i]];
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < i; ++k) y[i] -= lu_[i * n_ + k] * y[k];
    for (std::size_t i = n_; i-- > 0;) {
      for (std::size_t k = i + 1; k < n_; ++k) y[i] -= lu_[i * n_ + k] * y[k];
      y[i] /= lu_[i * n_ + i];
    }
    return y;
  }

  /// Solves A^T y = rhs for the stored matrix.
  std::vector<T> solve_scaled_transposed(std::span<const T> rhs) const {
    require_regular();
    std::vector<T> z(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < i; ++k) z[i] -= lu_[k * n_ + i] * z[k];
      z[i] /= lu_[i * n_ + i];
    }
    for (std::size_t i = n_; i-- > 0;)
      for (std::size_t k = i + 1; k < n_; ++k) z[i] -= lu_[k * n_ + i] * z[k];
    std::vector<T> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[perm_[i]] = z[i];
    return y;
  }

  std::vector<T> solve(std::span<const T> rhs) const {
    using std::exp;
    std::vector<T> b(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n_; ++i) b[i] *= exp(-offsets_[i]);
    auto x = solve_scaled(b);
    for (std::size_t i = 0; i < n_; ++i) x[i] *= exp(-offsets_[i]);
    return x;
  }

  /// Hager's 1-norm condition estimate of the stored matrix A.
  T condition_estimate() const {
    using std::abs;
    if (singular_) return std::numeric_limits<double>::infinity();
    if (n_ == 0) return T(1);
    std::vector<T> x(n_, T(1) / T(n_));
    T est(0);
    for (int iter = 0; iter < 5; ++iter) {
      auto y = solve_scaled(x);
      T ynorm(0);
      for (const T& v : y) ynorm += abs(v);
      if (iter > 0 && ynorm <= est) break;
      est = ynorm;
      std::vector<T> xi(n_);
      for (std::size_t i = 0; i < n_; ++i) xi[i] = y[i] < 0 ? T(-1) : T(1);
      auto z = solve_scaled_transposed(xi);
      std::size_t jmax = 0;
      for (std::size_t i = 1; i < n_; ++i)
        if (abs(z[i]) > abs(z[jmax])) jmax = i;
      T zx(0);
      for (std::size_t i = 0; i < n_; ++i) zx += z[i] * x[i];
      if (abs(z[jmax]) <= zx) break;
      std::fill(x.begin(), x.end(), T(0));
      x[jmax] = T(1);
    }
    return est * norm1_;
  }

 private:
  void require_regular() const {
    if (singular_) throw Error(ErrorCode::singular_determinant, "LU solve of a singular matrix");
  }

  std::size_t n_;
  std::vector<T> lu_;
  std::vector<std::size_t> perm_;
  std::vector<T> offsets_;
  T norm1_{0};
  int swaps_ = 0;
  bool singular_ = false;
};

template <class T>
struct SignedLogDet {
  T log_abs;
  int sign;
};

/// log det M for M symmetric positive definite (pivoted Cholesky).
/// Throws not_positive_definite for genuinely indefinite input.
template <class T>
T logdet_posdef(const SymmetricMatrix<T>& m) {
  return CholeskyFactor<T>(m).log_det();
}

/// log |det M| and sign(det M) by LU with partial pivoting.
/// Throws singular_determinant on an exact zero pivot.
template <class T>
SignedLogDet<T> logdet_general(const SymmetricMatrix<T>& m) {
  LuFactor<T> lu(m);
  if (lu.singular()) throw Error(ErrorCode::singular_determinant, "exact zero pivot in LU");
  return {lu.log_abs_det(), lu.sign()};
}

template <class T>
std::vector<T> solve_spd(const SymmetricMatrix<T>& m, std::span<const T> rhs) {
  return CholeskyFactor<T>(m).solve(rhs);
}

}  // namespace soliton_forge::numkit

#ifndef PRIORFORGE_JET_HPP
#define PRIORFORGE_JET_HPP

// Truncated Taylor series arithmetic. A Jet<Scalar, N> holds the first N
// Taylor coefficients c_k = f^(k)(x0) / k! of a function of one variable t
// around t = 0, and propagates them through arithmetic and elementary
// functions exactly (up to rounding).

#include <array>
#include <cmath>
#include <cstddef>

namespace priorforge {

template <typename Scalar, std::size_t N>
struct Jet {
  static_assert(N >= 1);
  std::array<Scalar, N> c{};

  static Jet constant(Scalar v) {
    Jet j;
    j.c[0] = v;
    return j;
  }
  /// The identity t -> x0 + t.
  static Jet variable(Scalar x0) {
    Jet j;
    j.c[0] = x0;
    if constexpr (N > 1) j.c[1] = Scalar(1);
    return j;
  }

  Scalar value() const { return c[0]; }

  /// k-th derivative at the expansion point.
  Scalar derivative(std::size_t k) const {
    Scalar f(1);
    for (std::size_t i = 2; i <= k; ++i) f *= Scalar(i);
    return c[k] * f;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t i = 0; i < N; ++i) c[i] += o.c[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t i = 0; i < N; ++i) c[i] -= o.c[i];
    return *this;
  }
  Jet& operator*=(Scalar s) {
    for (auto& v : c) v *= s;
    return *this;
  }
};

template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator+(Jet<Scalar, N> a, const Jet<Scalar, N>& b) { return a += b; }
template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator-(Jet<Scalar, N> a, const Jet<Scalar, N>& b) { return a -= b; }
template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator-(Jet<Scalar, N> a) { return a *= Scalar(-1); }
template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator*(Jet<Scalar, N> a, Scalar s) { return a *= s; }
template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator*(Scalar s, Jet<Scalar, N> a) { return a *= s; }
template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator+(Jet<Scalar, N> a, Scalar s) {
  a.c[0] += s;
  return a;
}
template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator-(Jet<Scalar, N> a, Scalar s) {
  a.c[0] -= s;
  return a;
}
template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator-(Scalar s, Jet<Scalar, N> a) {
  a *= Scalar(-1);
  a.c[0] += s;
  return a;
}

template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator*(const Jet<Scalar, N>& a, const Jet<Scalar, N>& b) {
  Jet<Scalar, N> r;
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t i = 0; i <= k; ++i) r.c[k] += a.c[i] * b.c[k - i];
  return r;
}

template <typename Scalar, std::size_t N>
Jet<Scalar, N> operator/(const Jet<Scalar, N>& a, const Jet<Scalar, N>& b) {
  Jet<Scalar, N> q;
  for (std::size_t k = 0; k < N; ++k) {
    Scalar s = a.c[k];
    for (std::size_t i = 1; i <= k; ++i) s -= b.c[i] * q.c[k - i];
    q.c[k] = s / b.c[0];
  }
  return q;
}

/// Requires a.value() > 0.
template <typename Scalar, std::size_t N>
Jet<Scalar, N> sqrt(const Jet<Scalar, N>& a) {
  using std::sqrt;
  Jet<Scalar, N> s;
  s.c[0] = sqrt(a.c[0]);
  for (std::size_t k = 1; k < N; ++k) {
    Scalar v = a.c[k];
    for (std::size_t i = 1; i < k; ++i) v -= s.c[i] * s.c[k - i];
    s.c[k] = v / (Scalar(2) * s.c[0]);
  }
  return s;
}

/// Requires a.value() > 0.
template <typename Scalar, std::size_t N>
Jet<Scalar, N> log(const Jet<Scalar, N>& a) {
  using std::log;
  Jet<Scalar, N> l;
  l.c[0] = log(a.c[0]);
  for (std::size_t k = 1; k < N; ++k) {
    Scalar v = Scalar(k) * a.c[k];
    for (std::size_t i = 1; i < k; ++i) v -= Scalar(i) * l.c[i] * a.c[k - i];
    l.c[k] = v / (Scalar(k) * a.c[0]);
  }
  return l;
}

/// f(a(t)) where `outer` holds the Taylor coefficients of f at a.value().
template <typename Scalar, std::size_t N>
Jet<Scalar, N> compose(const std::array<Scalar, N>& outer, const Jet<Scalar, N>& a) {
  Jet<Scalar, N> delta = a;
  delta.c[0] = Scalar(0);
  Jet<Scalar, N> r = Jet<Scalar, N>::constant(outer[N - 1]);
  for (std::size_t m = N - 1; m-- > 0;) r = r * delta + outer[m];
  return r;
}

}  // namespace priorforge

#endif  // PRIORFORGE_JET_HPP

#pragma once

#include <cmath>

#include <Eigen/Core>

namespace laneirl::ad {

// Forward-mode scalar carrying value + gradient over N seed directions.
template <int N>
struct Dual1 {
  using Grad = Eigen::Matrix<double, N, 1>;

  double v = 0.0;
  Grad g = Grad::Zero();

  Dual1() = default;
  explicit Dual1(double value) : v(value) {}

  static Dual1 variable(double value, int index) {
    Dual1 d(value);
    d.g[index] = 1.0;
    return d;
  }
};

// Forward-mode scalar carrying value + gradient + Hessian over N seed directions.
template <int N>
struct Dual2 {
  using Grad = Eigen::Matrix<double, N, 1>;
  using Hess = Eigen::Matrix<double, N, N>;

  double v = 0.0;
  Grad g = Grad::Zero();
  Hess h = Hess::Zero();

  Dual2() = default;
  explicit Dual2(double value) : v(value) {}

  static Dual2 variable(double value, int index) {
    Dual2 d(value);
    d.g[index] = 1.0;
    return d;
  }
};

namespace detail {

template <int N>
inline void add_outer(typename Dual2<N>::Hess& h, const typename Dual2<N>::Grad& a,
                      const typename Dual2<N>::Grad& b, double s) {
  h.noalias() += s * (a * b.transpose());
}

}  // namespace detail

// ---- arithmetic: Dual1 ----

template <int N>
Dual1<N> operator+(const Dual1<N>& a, const Dual1<N>& b) {
  Dual1<N> r(a.v + b.v);
  r.g = a.g + b.g;
  return r;
}
template <int N>
Dual1<N> operator+(const Dual1<N>& a, double b) {
  Dual1<N> r = a;
  r.v += b;
  return r;
}
template <int N>
Dual1<N> operator+(double a, const Dual1<N>& b) {
  return b + a;
}
template <int N>
Dual1<N> operator-(const Dual1<N>& a) {
  Dual1<N> r(-a.v);
  r.g = -a.g;
  return r;
}
template <int N>
Dual1<N> operator-(const Dual1<N>& a, const Dual1<N>& b) {
  Dual1<N> r(a.v - b.v);
  r.g = a.g - b.g;
  return r;
}
template <int N>
Dual1<N> operator-(const Dual1<N>& a, double b) {
  Dual1<N> r = a;
  r.v -= b;
  return r;
}
template <int N>
Dual1<N> operator-(double a, const Dual1<N>& b) {
  Dual1<N> r(a - b.v);
  r.g = -b.g;
  return r;
}
template <int N>
Dual1<N> operator*(const Dual1<N>& a, const Dual1<N>& b) {
  Dual1<N> r(a.v * b.v);
  r.g = a.g * b.v + b.g * a.v;
  return r;
}
template <int N>
Dual1<N> operator*(const Dual1<N>& a, double b) {
  Dual1<N> r(a.v * b);
  r.g = a.g * b;
  return r;
}
template <int N>
Dual1<N> operator*(double a, const Dual1<N>& b) {
  return b * a;
}
template <int N>
Dual1<N> operator/(const Dual1<N>& a, const Dual1<N>& b) {
  const double inv = 1.0 / b.v;
  Dual1<N> r(a.v * inv);
  r.g = (a.g - r.v * b.g) * inv;
  return r;
}
template <int N>
Dual1<N> operator/(const Dual1<N>& a, double b) {
  return a * (1.0 / b);
}
template <int N>
Dual1<N> operator/(double a, const Dual1<N>& b) {
  const double inv = 1.0 / b.v;
  Dual1<N> r(a * inv);
  r.g = (-r.v * inv) * b.g;
  return r;
}

// f(u) with derivative fp at u.v.
template <int N>
Dual1<N> chain(const Dual1<N>& u, double f, double fp) {
  Dual1<N> r(f);
  r.g = fp * u.g;
  return r;
}

template <int N>
Dual1<N> exp(const Dual1<N>& u) {
  const double e = std::exp(u.v);
  return chain(u, e, e);
}
template <int N>
Dual1<N> sin(const Dual1<N>& u) {
  return chain(u, std::sin(u.v), std::cos(u.v));
}
template <int N>
Dual1<N> cos(const Dual1<N>& u) {
  return chain(u, std::cos(u.v), -std::sin(u.v));
}
template <int N>
Dual1<N> sqrt(const Dual1<N>& u) {
  const double s = std::sqrt(u.v);
  return chain(u, s, 0.5 / s);
}
template <int N>
Dual1<N> abs(const Dual1<N>& u) {
  if (u.v > 0.0) return u;
  if (u.v < 0.0) return -u;
  return Dual1<N>(0.0);  // subgradient 0 at the kink
}
template <int N>
Dual1<N> atan2(const Dual1<N>& y, const Dual1<N>& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  Dual1<N> r(std::atan2(y.v, x.v));
  r.g = (x.v / r2) * y.g - (y.v / r2) * x.g;
  return r;
}
template <int N>
Dual1<N> max(const Dual1<N>& u, double floor_value) {
  return u.v >= floor_value ? u : Dual1<N>(floor_value);
}

// ---- arithmetic: Dual2 ----

template <int N>
Dual2<N> operator+(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r(a.v + b.v);
  r.g = a.g + b.g;
  r.h = a.h + b.h;
  return r;
}
template <int N>
Dual2<N> operator+(const Dual2<N>& a, double b) {
  Dual2<N> r = a;
  r.v += b;
  return r;
}
template <int N>
Dual2<N> operator+(double a, const Dual2<N>& b) {
  return b + a;
}
template <int N>
Dual2<N> operator-(const Dual2<N>& a) {
  Dual2<N> r(-a.v);
  r.g = -a.g;
  r.h = -a.h;
  return r;
}
template <int N>
Dual2<N> operator-(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r(a.v - b.v);
  r.g = a.g - b.g;
  r.h = a.h - b.h;
  return r;
}
template <int N>
Dual2<N> operator-(const Dual2<N>& a, double b) {
  Dual2<N> r = a;
  r.v -= b;
  return r;
}
template <int N>
Dual2<N> operator-(double a, const Dual2<N>& b) {
  Dual2<N> r(a - b.v);
  r.g = -b.g;
  r.h = -b.h;
  return r;
}
template <int N>
Dual2<N> operator*(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r(a.v * b.v);
  r.g = a.g * b.v + b.g * a.v;
  r.h = a.h * b.v + b.h * a.v;
  detail::add_outer<N>(r.h, a.g, b.g, 1.0);
  detail::add_outer<N>(r.h, b.g, a.g, 1.0);
  return r;
}
template <int N>
Dual2<N> operator*(const Dual2<N>& a, double b) {
  Dual2<N> r(a.v * b);
  r.g = a.g * b;
  r.h = a.h * b;
  return r;
}
template <int N>
Dual2<N> operator*(double a, const Dual2<N>& b) {
  return b * a;
}

// f(u) with first/second derivatives fp, fpp at u.v.
template <int N>
Dual2<N> chain(const Dual2<N>& u, double f, double fp, double fpp) {
  Dual2<N> r(f);
  r.g = fp * u.g;
  r.h = fp * u.h;
  detail::add_outer<N>(r.h, u.g, u.g, fpp);
  return r;
}

template <int N>
Dual2<N> operator/(const Dual2<N>& a, const Dual2<N>& b) {
  const double iv = 1.0 / b.v;
  return a * chain(b, iv, -iv * iv, 2.0 * iv * iv * iv);
}
template <int N>
Dual2<N> operator/(const Dual2<N>& a, double b) {
  return a * (1.0 / b);
}
template <int N>
Dual2<N> operator/(double a, const Dual2<N>& b) {
  const double iv = 1.0 / b.v;
  return a * chain(b, iv, -iv * iv, 2.0 * iv * iv * iv);
}

template <int N>
Dual2<N> exp(const Dual2<N>& u) {
  const double e = std::exp(u.v);
  return chain(u, e, e, e);
}
template <int N>
Dual2<N> sin(const Dual2<N>& u) {
  const double s = std::sin(u.v);
  return chain(u, s, std::cos(u.v), -s);
}
template <int N>
Dual2<N> cos(const Dual2<N>& u) {
  const double c = std::cos(u.v);
  return chain(u, c, -std::sin(u.v), -c);
}
template <int N>
Dual2<N> sqrt(const Dual2<N>& u) {
  const double s = std::sqrt(u.v);
  return chain(u, s, 0.5 / s, -0.25 / (s * u.v));
}
template <int N>
Dual2<N> abs(const Dual2<N>& u) {
  if (u.v > 0.0) return u;
  if (u.v < 0.0) return -u;
  return Dual2<N>(0.0);  // subgradient 0 at the kink
}
template <int N>
Dual2<N> atan2(const Dual2<N>& y, const Dual2<N>& x) {
  // theta(x, y) = atan2(y, x); compose the two-argument second-order chain rule.
  const double r2 = x.v * x.v + y.v * y.v;
  const double tx = -y.v / r2;           // d theta / dx
  const double ty = x.v / r2;            // d theta / dy
  const double r4 = r2 * r2;
  const double txx = 2.0 * x.v * y.v / r4;
  const double tyy = -txx;
  const double txy = (y.v * y.v - x.v * x.v) / r4;
  Dual2<N> r(std::atan2(y.v, x.v));
  r.g = tx * x.g + ty * y.g;
  r.h = tx * x.h + ty * y.h;
  detail::add_outer<N>(r.h, x.g, x.g, txx);
  detail::add_outer<N>(r.h, y.g, y.g, tyy);
  detail::add_outer<N>(r.h, x.g, y.g, txy);
  detail::add_outer<N>(r.h, y.g, x.g, txy);
  return r;
}
template <int N>
Dual2<N> max(const Dual2<N>& u, double floor_value) {
  return u.v >= floor_value ? u : Dual2<N>(floor_value);
}

// double passthroughs so feature kernels can be instantiated at plain double.
inline double chain(double, double f, double) { return f; }
inline double chain(double, double f, double, double) { return f; }
inline double max(double u, double floor_value) { return u >= floor_value ? u : floor_value; }

using std::abs;
using std::atan2;
using std::cos;
using std::exp;
using std::sin;
using std::sqrt;

}  // namespace laneirl::ad

#pragma once

#include <cmath>

namespace fracsource::detail {

// Double-double value (hi + lo with |lo| <= ulp(hi)/2), Dekker/Knuth style.
// Only the operations the Mittag-Leffler series accumulation needs.
struct DD {
  double hi = 0.0;
  double lo = 0.0;

  DD() = default;
  DD(double h) : hi(h), lo(0.0) {}
  DD(double h, double l) : hi(h), lo(l) {}

  double value() const { return hi + lo; }
};

inline DD two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline DD quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline DD two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline DD dd_add(const DD& a, const DD& b) {
  DD s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline DD dd_mul(const DD& a, const DD& b) {
  DD p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline DD dd_mul(const DD& a, double b) {
  DD p = two_prod(a.hi, b);
  p.lo += a.lo * b;
  return quick_two_sum(p.hi, p.lo);
}

inline DD dd_div(const DD& a, const DD& b) {
  const double q1 = a.hi / b.hi;
  DD r = dd_add(a, dd_mul(b, -q1));
  const double q2 = r.hi / b.hi;
  r = dd_add(r, dd_mul(b, -q2));
  const double q3 = r.hi / b.hi;
  DD q = quick_two_sum(q1, q2);
  return dd_add(q, DD(q3));
}

inline DD dd_neg(const DD& a) { return {-a.hi, -a.lo}; }

inline double dd_abs(const DD& a) { return std::fabs(a.value()); }

} // namespace fracsource::detail

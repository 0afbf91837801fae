#pragma once

#include <cmath>
#include <compare>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace ddh {

using Rational = boost::multiprecision::cpp_rational;

/// Exact element a + b*sqrt(2) of Q(sqrt 2). Finite doubles convert exactly,
/// so formulas evaluated on measured doubles can be checked without rounding.
class QuadraticSurd {
 public:
  QuadraticSurd() = default;
  QuadraticSurd(int v) : a_(v) {}  // NOLINT(google-explicit-constructor)
  QuadraticSurd(Rational a, Rational b = 0) : a_(std::move(a)), b_(std::move(b)) {}

  /// Exact value of a finite double.
  static QuadraticSurd from_double(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("QuadraticSurd: non-finite input");
    return QuadraticSurd(exact_rational(v));
  }
  static QuadraticSurd sqrt2() { return QuadraticSurd(Rational(0), Rational(1)); }

  const Rational& rational_part() const { return a_; }
  const Rational& surd_part() const { return b_; }

  int sign() const {
    const int sa = a_.sign();
    const int sb = b_.sign();
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // Opposite signs: compare a^2 with 2 b^2.
    const Rational diff = a_ * a_ - 2 * b_ * b_;
    return sa * diff.sign();
  }

  double to_double() const {
    return a_.convert_to<double>() + b_.convert_to<double>() * std::sqrt(2.0);
  }

  QuadraticSurd operator-() const { return {-a_, -b_}; }
  friend QuadraticSurd operator+(const QuadraticSurd& x, const QuadraticSurd& y) {
    return {x.a_ + y.a_, x.b_ + y.b_};
  }
  friend QuadraticSurd operator-(const QuadraticSurd& x, const QuadraticSurd& y) {
    return {x.a_ - y.a_, x.b_ - y.b_};
  }
  friend QuadraticSurd operator*(const QuadraticSurd& x, const QuadraticSurd& y) {
    return {x.a_ * y.a_ + 2 * x.b_ * y.b_, x.a_ * y.b_ + x.b_ * y.a_};
  }
  friend QuadraticSurd operator/(const QuadraticSurd& x, const QuadraticSurd& y) {
    const Rational norm = y.a_ * y.a_ - 2 * y.b_ * y.b_;
    if (norm == 0) throw std::domain_error("QuadraticSurd: division by zero");
    const QuadraticSurd conj(y.a_, -y.b_);
    const QuadraticSurd num = x * conj;
    return {num.a_ / norm, num.b_ / norm};
  }
  friend bool operator==(const QuadraticSurd& x, const QuadraticSurd& y) {
    return x.a_ == y.a_ && x.b_ == y.b_;
  }
  friend std::strong_ordering operator<=>(const QuadraticSurd& x, const QuadraticSurd& y) {
    const int s = (x - y).sign();
    if (s < 0) return std::strong_ordering::less;
    if (s > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  static Rational exact_rational(double v) {
    int exponent = 0;
    const double mantissa = std::frexp(v, &exponent);
    // 53-bit mantissa scaled to an integer.
    const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
    Rational r(scaled);
    const int shift = exponent - 53;
    const Rational two_pow = Rational(boost::multiprecision::cpp_int(1) << std::abs(shift));
    return shift >= 0 ? Rational(r * two_pow) : Rational(r / two_pow);
  }

  Rational a_{0};
  Rational b_{0};
};

/// sqrt(2) in the scalar type used by the feasibility formulas.
template <class T>
T sqrt2();

template <>
inline double sqrt2<double>() {
  return std::sqrt(2.0);
}

template <>
inline QuadraticSurd sqrt2<QuadraticSurd>() {
  return QuadraticSurd::sqrt2();
}

}  // namespace ddh

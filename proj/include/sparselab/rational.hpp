#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>

namespace sparselab {

/// Arbitrary-precision rational scalar used by the exact evaluation paths.
using Rational = boost::multiprecision::cpp_rational;
using BigInt   = boost::multiprecision::cpp_int;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// 2^k as an exact rational, k may be negative.
inline Rational pow2_rational(int k) {
    BigInt one = 1;
    if (k >= 0) return Rational(one << k);
    return Rational(one, one << (-k));
}

/// |x| for any scalar used in the templated kernels (double or Rational).
template <class S>
inline S abs_of(const S& x) {
    using std::abs;
    return abs(x); // ADL also finds boost::multiprecision::abs
}

/// x^n for non-negative integer n (exact for Rational).
template <class S>
inline S int_pow(S x, unsigned n) {
    S acc(1);
    while (n != 0) {
        if (n & 1u) acc = acc * x;
        x = x * x;
        n >>= 1;
    }
    return acc;
}

} // namespace sparselab

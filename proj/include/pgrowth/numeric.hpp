#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace pgrowth {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline BigInt big_pow(long long base, long long e) {
  BigInt r = 1;
  BigInt b = base;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline std::uint64_t upow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

/// Exponent e with n == p^e, if n is a power of p.
inline std::optional<int> log_exact(BigInt n, long long p) {
  if (n <= 0) return std::nullopt;
  int e = 0;
  while (n > 1) {
    if (n % p != 0) return std::nullopt;
    n /= p;
    ++e;
  }
  return e;
}

inline std::string to_string(const BigInt& x) { return x.str(); }

inline std::string to_string(const Rational& q) {
  auto num = boost::multiprecision::numerator(q);
  auto den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rational make_rational(long long num, long long den = 1) {
  return Rational(BigInt(num), BigInt(den));
}

inline long long mod_inverse(long long a, long long p) {
  a %= p;
  if (a < 0) a += p;
  long long r = 1, e = p - 2, b = a;
  while (e > 0) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

}  // namespace pgrowth

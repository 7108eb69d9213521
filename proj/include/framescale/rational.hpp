#pragma once

// Exact rational arithmetic for verification of small instances.

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <utility>
#include <vector>

#include "framescale/errors.hpp"

namespace framescale {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;
using RationalMatrix = std::vector<std::vector<Rational>>;  // row-major

/// Exact value of a decimal literal such as "-1.25e-3".
inline Rational parse_decimal_rational(const std::string& text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  BigInt digits = 0;
  long long scale = 0;
  bool any = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits = digits * 10 + (ch - '0');
      if (seen_point) ++scale;
      any = true;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any) throw InvalidInput("rational: not a decimal number: '" + text + "'");
  long long exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) exp_negative = text[i++] == '-';
    bool exp_any = false;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 100000) throw InvalidInput("rational: exponent out of range: '" + text + "'");
      exp_any = true;
    }
    if (!exp_any) throw InvalidInput("rational: malformed exponent: '" + text + "'");
    if (exp_negative) exponent = -exponent;
  }
  if (i != text.size()) throw InvalidInput("rational: trailing characters in '" + text + "'");

  const long long net = exponent - scale;
  BigInt pow10 = 1;
  for (long long k = 0; k < (net < 0 ? -net : net); ++k) pow10 *= 10;
  Rational value = net >= 0 ? Rational(digits * pow10) : Rational(digits, pow10);
  return negative ? Rational(-value) : value;
}

/// Exact rank by fraction-based Gaussian elimination.
inline std::size_t exact_rank(RationalMatrix m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size();
  const std::size_t cols = m.front().size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][col] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (m[r][col] == 0) continue;
      const Rational factor = m[r][col] / m[rank][col];
      for (std::size_t k = col; k < cols; ++k) m[r][k] -= factor * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace framescale

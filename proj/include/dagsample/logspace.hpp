#pragma once

// Log-domain arithmetic.  All posterior masses in this library live in log
// space; the helpers here use the usual max-shift so that sums of many tiny
// terms neither underflow nor overflow.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dagsample {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without leaving log space.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;  // covers a == b == -inf as well
  return a + std::log1p(std::exp(b - a));
}

// log(sum_i exp(x_i)) with a single max shift; empty ranges yield -inf.
inline double log_sum_exp(const double* begin, const double* end) {
  double m = kNegInf;
  for (const double* p = begin; p != end; ++p) m = std::max(m, *p);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (const double* p = begin; p != end; ++p) acc += std::exp(*p - m);
  return m + std::log(acc);
}

inline double log_sum_exp(const std::vector<double>& xs) {
  return log_sum_exp(xs.data(), xs.data() + xs.size());
}

}  // namespace dagsample

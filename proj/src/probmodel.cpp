#include "likecard/probmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "likecard/errors.hpp"

namespace likecard::prob {

double p_bucket(double f, std::uint32_t m) {
  if (m < 2) throw std::invalid_argument("layer count must be at least 2");
  if (!(f >= 0.0 && f < 1.0)) throw std::invalid_argument("f must lie in [0, 1)");
  const double fm = std::pow(f, static_cast<double>(m));
  return m % 2 == 1 ? (f - fm) / (1.0 + f) : (f + fm) / (1.0 + f);
}

double p_fallthrough_naive(double f, std::uint32_t m, std::uint32_t n) {
  if (n < 2) throw std::invalid_argument("bucket count must be at least 2");
  return std::pow(1.0 - p_bucket(f, m), static_cast<double>(n - 1));
}

double choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double out = 1.0;
  for (std::uint64_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

double nondecreasing_share(std::uint32_t t, std::uint32_t n) {
  if (n < 2) throw std::invalid_argument("bucket count must be at least 2");
  // C(n+t-2, t) / (n-1)^t as a running product keeps intermediate values small.
  double share = 1.0;
  const double support = static_cast<double>(n - 1);
  for (std::uint32_t j = 1; j <= t; ++j) share *= (static_cast<double>(n) - 2.0 + j) / (j * support);
  return share;
}

double p_b1_prefix_walk(double q, std::uint32_t t, std::uint32_t n) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  if (t < 1) throw std::invalid_argument("prefix count must be at least 1");
  return 1.0 - std::pow(1.0 - q, static_cast<double>(t)) * nondecreasing_share(t, n);
}

double g(double p_n, std::uint32_t t, std::uint32_t n) {
  return std::pow((1.0 - p_n) / choose(static_cast<std::uint64_t>(n) + t - 2, t), 1.0 / t);
}

double p_bucket_peak(std::uint32_t m) {
  if (m % 2 == 0) return 1.0;
  constexpr double phi = 0.6180339887498949;
  double a = 0.0;
  double b = 1.0;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = p_bucket(x1, m);
  double f2 = p_bucket(x2, m);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = p_bucket(x2, m);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = p_bucket(x1, m);
    }
  }
  return 0.5 * (a + b);
}

double feasible_f_max(double p_n, std::uint32_t n, std::uint32_t m) {
  if (!(p_n > 0.0 && p_n < 1.0)) throw std::invalid_argument("p_n must lie in (0, 1)");
  if (n < 2) throw std::invalid_argument("bucket count must be at least 2");
  constexpr double kOpenTop = 1.0 - kBisectionTolerance;

  const double c = 1.0 - static_cast<double>(n - 1) * g(p_n, 2, n);
  if (c <= 0.0) return kOpenTop;
  const double c_prime = 1.0 - std::pow(c, 1.0 / static_cast<double>(n - 1));
  if (!(c_prime > 0.0)) {
    throw InfeasibleError("no false-positive rate reaches p_n = " + std::to_string(p_n) + " with " +
                          std::to_string(n) + " buckets and " + std::to_string(m) + " layers");
  }

  const double peak = p_bucket_peak(m);
  const double top = std::min(peak, kOpenTop);
  if (p_bucket(top, m) <= c_prime) return kOpenTop;

  double lo = 0.0;
  double hi = top;
  while (hi - lo > kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    (p_bucket(mid, m) <= c_prime ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace likecard::prob

#pragma once

#include <cstdint>

namespace likecard::prob {

/// Probability that an empty-answer key is accepted by one bucket's m-layer
/// cascade when every Bloom layer fires independently with rate f:
/// (f - f^m)/(1+f) for odd m, (f + f^m)/(1+f) for even m.
[[nodiscard]] double p_bucket(double f, std::uint32_t m);

/// Probability that the key passes all n-1 filtered buckets and lands in
/// bucket 1: (1 - p_bucket)^(n-1).
[[nodiscard]] double p_fallthrough_naive(double f, std::uint32_t m, std::uint32_t n);

/// C(n+t-2, t) / (n-1)^t: the share of length-t bucket sequences over
/// {2..n} that are non-decreasing.
[[nodiscard]] double nondecreasing_share(std::uint32_t t, std::uint32_t n);

/// Probability that the prefix walk over t independently classified prefixes
/// routes an empty-answer query to bucket 1, given per-prefix fall-through q.
[[nodiscard]] double p_b1_prefix_walk(double q, std::uint32_t t, std::uint32_t n);

/// ((1-p_n) / C(n+t-2, t))^(1/t).
[[nodiscard]] double g(double p_n, std::uint32_t t, std::uint32_t n);

/// Binomial coefficient as a double.
[[nodiscard]] double choose(std::uint64_t n, std::uint64_t k);

/// Upper end of the feasible false-positive range when the walk must reach
/// bucket 1 with probability at least p_n (planning uses t = 2).
///
/// Returns the largest f such that p_bucket(f', m) <= c' for every f' in (0, f],
/// where c = 1 - (n-1) g(2) and c' = 1 - c^(1/(n-1)); found by bisection to
/// 1e-9. When c <= 0 (or no f in (0,1) violates the bound) the constraint is
/// vacuous and 1 - 1e-9 is returned. Throws InfeasibleError when c' <= 0.
[[nodiscard]] double feasible_f_max(double p_n, std::uint32_t n, std::uint32_t m);

/// The f maximising p_bucket(., m) on (0,1) for odd m (golden-section search);
/// 1 for even m, where p_bucket is increasing.
[[nodiscard]] double p_bucket_peak(std::uint32_t m);

inline constexpr double kBisectionTolerance = 1e-9;

}  // namespace likecard::prob

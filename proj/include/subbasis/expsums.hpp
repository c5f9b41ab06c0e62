// expsums.hpp
//
// Exponential sums over a sieved base set and over the integers, the
// composition sums S_l(n) = sum over x_1 + ... + x_l = n of prod x_i^(w-1),
// and the major-arc dissection of [0, 1].
//
// All sums run over ascending n in fixed-size blocks; block partials are
// combined in block order, so results do not depend on the thread count.

#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include "subbasis/basesets.hpp"

namespace subbasis {

// Full: 1 <= n <= x. Tail: x/h <= n <= x.
enum class SumRange { Full, Tail };

std::string_view to_string(SumRange r);
SumRange parse_sum_range(std::string_view text);

// g(alpha; x) = sum over elements n <= x of e(n alpha).
std::complex<double> g_sum(const SieveIndex& index, double alpha, std::uint64_t x);

// T(alpha; x) = sum over elements n = p^k in range of n^(omega - 1/k) log n e(n alpha).
// h only matters for the tail range.
std::complex<double> T_sum(const SieveIndex& index, double alpha, std::uint64_t x, double omega,
                           unsigned h, SumRange range);

// u(theta; x) = sum over integers n in range of n^(omega - 1) e(n theta).
std::complex<double> u_sum(double theta, std::uint64_t x, double omega, unsigned h,
                           SumRange range);

struct CompositionSum {
    double value = 0.0;
    double prediction = 0.0;  // Gamma(w)^l / Gamma(l w) n^(l w - 1)
    double ratio() const { return value / prediction; }
};

// Direct recursion S_{j+1}(m) = sum_{i < m} S_j(i) (m - i)^(w - 1).
// Costs about (l - 2) n^2 / 2 operations for l >= 3 and n for l = 2.
CompositionSum composition_sum(std::uint64_t n, unsigned ell, double omega,
                               double work_budget = 2e10);

struct Arc {
    std::uint64_t q = 1;
    std::uint64_t a = 0;
    double center = 0.0;
    double half_width = 0.0;
    double lo() const { return center - half_width; }
    double hi() const { return center + half_width; }
};

struct ArcSet {
    std::uint64_t N = 0;
    double Q = 0.0;
    std::uint64_t q_max = 0;  // floor(Q)
    std::vector<Arc> arcs;    // ascending centers, including 0/1 and 1/1
    double total_measure = 0.0;  // measure of the union inside [0, 1]
};

// Arcs |alpha - a/q| <= Q/N for q <= Q, gcd(a,q) = 1, with Q = (log N)^C.
ArcSet major_arcs(std::uint64_t N, double C_exp);
ArcSet major_arcs_with_Q(std::uint64_t N, double Q);

}  // namespace subbasis

// singular.hpp
//
// Gauss sums and truncated singular series
//
//   S(n, Q) = sum_{q <= Q} A(q; n),
//   A(q; n) = sum_{a mod q, (a,q) = 1} (G(a, q) / D(q))^h e(-n a / q),
//
// where G is the complete Gauss sum and D(q) = q for the Waring series, and
// G is the Gauss sum restricted to residues coprime to q and D(q) = phi(q)
// for the Waring-Goldbach series.
//
// Three evaluation routes are provided:
//   - singular_series_reference: the literal double sum, one Gauss sum per
//     (a, q). Quadratic in q; for small Q and as a test oracle.
//   - singular_series / singular_series_batch: G(a, q) is constant on
//     cosets of the subgroup of k-th power units, so it is evaluated once per
//     coset; the a-sum is then a table lookup per unit. Terms are summed in
//     ascending q with compensated summation, independent of thread count.
//   - SingularSeriesEvaluator: A(q; n) is multiplicative in q, so prime-power
//     tables A(p^e; r) indexed by r = n mod p^e give every A(q; n) as a
//     product. Fast for many n at moderate Q.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace subbasis {

enum class SeriesVariant { Waring, WaringGoldbach };

std::string_view to_string(SeriesVariant v);
SeriesVariant parse_series_variant(std::string_view text);

// Sum over 1 <= r <= q (restricted: gcd(r,q) = 1) of e(a r^k / q).
std::complex<double> gauss_sum(std::uint64_t a, std::uint64_t q, unsigned k, bool restricted);

struct SingularValue {
    SeriesVariant variant = SeriesVariant::Waring;
    std::uint64_t n = 0;
    unsigned k = 1;
    unsigned h = 2;
    std::uint64_t Q = 1;
    double value = 0.0;
    double imag_residual = 0.0;
    std::uint64_t terms = 0;   // number of (a, q) pairs summed
    bool below_h_star = false; // Waring-Goldbach with h < h*_k
};

struct SingularOptions {
    // Cap on the elementary operations of one evaluation (unit lookups plus
    // Gauss-sum terms), and on the bytes of per-q term storage.
    double work_budget = 4e10;
    std::uint64_t memory_budget = std::uint64_t{1} << 30;
};

SingularValue singular_series(SeriesVariant variant, std::uint64_t n, unsigned k, unsigned h,
                              std::uint64_t Q, const SingularOptions& options = {});

std::vector<SingularValue> singular_series_batch(SeriesVariant variant,
                                                 std::span<const std::uint64_t> ns, unsigned k,
                                                 unsigned h, std::uint64_t Q,
                                                 const SingularOptions& options = {});

// Values at each Q of an increasing list, from one pass up to the largest Q.
std::vector<std::pair<std::uint64_t, double>> truncation_profile(
    SeriesVariant variant, std::uint64_t n, unsigned k, unsigned h,
    std::span<const std::uint64_t> Q_list, const SingularOptions& options = {});

SingularValue singular_series_reference(SeriesVariant variant, std::uint64_t n, unsigned k,
                                        unsigned h, std::uint64_t Q);

class SingularSeriesEvaluator {
public:
    SingularSeriesEvaluator(SeriesVariant variant, unsigned k, unsigned h, std::uint64_t Q,
                            const SingularOptions& options = {});

    SingularValue operator()(std::uint64_t n) const;

    // A(p^e; r) for the prime power q = p^e <= Q; r is reduced mod q.
    std::complex<double> local_factor(std::uint64_t q, std::uint64_t r) const;

private:
    SeriesVariant variant_;
    unsigned k_;
    unsigned h_;
    std::uint64_t Q_;
    std::uint64_t terms_ = 0;
    // Prime-power tables: offset_[q] is the start of A(q; .) in table_ when q
    // is a prime power, else npos.
    std::vector<std::uint64_t> offset_;
    std::vector<std::complex<double>> table_;
    // Factor list of every q <= Q as prime powers, flattened.
    std::vector<std::uint32_t> factor_start_;
    std::vector<std::uint32_t> factors_;
};

}  // namespace subbasis

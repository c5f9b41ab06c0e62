#include "subbasis/expsums.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "subbasis/error.hpp"
#include "subbasis/numeric.hpp"
#include "subbasis/parallel.hpp"
#include "subbasis/regvar.hpp"

namespace subbasis {

std::string_view to_string(SumRange r) { return r == SumRange::Full ? "full" : "tail"; }

SumRange parse_sum_range(std::string_view text) {
    if (text == "full") return SumRange::Full;
    if (text == "tail") return SumRange::Tail;
    throw ConfigError("bad_range", fmt::format("unknown range '{}'", text));
}

namespace {

constexpr std::size_t kBlock = std::size_t{1} << 14;

// Sum of term(i) for i in [lo, hi), in fixed blocks combined in order.
template <typename Term>
std::complex<double> blocked_sum(std::uint64_t lo, std::uint64_t hi, const Term& term) {
    if (hi <= lo) return {0.0, 0.0};
    const std::uint64_t count = hi - lo;
    const std::size_t n_blocks = (count + kBlock - 1) / kBlock;
    std::vector<std::complex<double>> partial(n_blocks);
    parallel_blocks(n_blocks, [&](std::size_t b) {
        ComplexKahanSum acc;
        const std::uint64_t start = lo + b * kBlock;
        const std::uint64_t stop = std::min(hi, start + kBlock);
        for (std::uint64_t i = start; i < stop; ++i) acc.add(term(i));
        partial[b] = acc.value();
    });
    ComplexKahanSum total;
    for (const auto& p : partial) total.add(p);
    return total.value();
}

std::uint64_t tail_start(std::uint64_t x, unsigned h) {
    if (h < 1) throw ConfigError("bad_h", "tail range needs h >= 1");
    return (x + h - 1) / h;  // smallest n with n h >= x
}

void check_covered(const SieveIndex& index, std::uint64_t x) {
    if (x > index.spec().limit)
        throw ResourceError("beyond_sieve", fmt::format("x = {} exceeds sieve limit {}", x,
                                                        index.spec().limit));
}

}  // namespace

std::complex<double> g_sum(const SieveIndex& index, double alpha, std::uint64_t x) {
    check_covered(index, x);
    const auto elems = index.elements_up_to(x);
    return blocked_sum(0, elems.size(),
                       [&](std::uint64_t i) { return unit_phase(frac_product(elems[i], alpha)); });
}

std::complex<double> T_sum(const SieveIndex& index, double alpha, std::uint64_t x, double omega,
                           unsigned h, SumRange range) {
    check_covered(index, x);
    const auto elems = index.elements_up_to(x);
    std::uint64_t first = 0;
    if (range == SumRange::Tail) {
        const std::uint64_t lo = tail_start(x, h);
        first = static_cast<std::uint64_t>(std::lower_bound(elems.begin(), elems.end(), lo) -
                                           elems.begin());
    }
    const double expo = omega - 1.0 / static_cast<double>(index.spec().k);
    return blocked_sum(first, elems.size(), [&](std::uint64_t i) {
        const double n = static_cast<double>(elems[i]);
        return std::pow(n, expo) * std::log(n) * unit_phase(frac_product(elems[i], alpha));
    });
}

std::complex<double> u_sum(double theta, std::uint64_t x, double omega, unsigned h,
                           SumRange range) {
    if (x < 1) throw ConfigError("bad_x", "u_sum needs x >= 1");
    const std::uint64_t lo = range == SumRange::Tail ? std::max<std::uint64_t>(1, tail_start(x, h)) : 1;
    return blocked_sum(lo, x + 1, [&](std::uint64_t n) {
        return std::pow(static_cast<double>(n), omega - 1.0) * unit_phase(frac_product(n, theta));
    });
}

CompositionSum composition_sum(std::uint64_t n, unsigned ell, double omega, double work_budget) {
    if (ell < 2) throw ConfigError("bad_ell", "composition_sum needs l >= 2");
    if (!(omega > 0.0)) throw ConfigError("bad_omega", "composition_sum needs omega > 0");
    if (n < ell) throw ConfigError("bad_n", "composition_sum needs n >= l");
    const double nd = static_cast<double>(n);
    const double work = ell == 2 ? nd : static_cast<double>(ell - 2) * nd * nd / 2.0;
    if (work > work_budget)
        throw ResourceError("work_budget",
                            fmt::format("composition sum n = {}, l = {} needs ~{:.3g} operations, "
                                        "work budget is {:.3g}",
                                        n, ell, work, work_budget));

    // w[m] = m^(omega - 1); w[0] is unused.
    std::vector<double> w(n + 1, 0.0);
    for (std::uint64_t m = 1; m <= n; ++m) w[m] = std::pow(static_cast<double>(m), omega - 1.0);

    // cur[m] = S_j(m) for m < n.
    std::vector<double> cur(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n));
    for (unsigned j = 1; j + 1 < ell; ++j) {
        std::vector<double> next(n, 0.0);
        const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
        parallel_blocks(n_blocks, [&](std::size_t b) {
            const std::uint64_t start = b * kBlock;
            const std::uint64_t stop = std::min<std::uint64_t>(n, start + kBlock);
            for (std::uint64_t m = std::max<std::uint64_t>(start, j + 1); m < stop; ++m) {
                // Four interleaved partial sums in a fixed order.
                double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
                std::uint64_t i = j;
                for (; i + 3 < m; i += 4) {
                    s0 += cur[i] * w[m - i];
                    s1 += cur[i + 1] * w[m - i - 1];
                    s2 += cur[i + 2] * w[m - i - 2];
                    s3 += cur[i + 3] * w[m - i - 3];
                }
                for (; i < m; ++i) s0 += cur[i] * w[m - i];
                next[m] = (s0 + s1) + (s2 + s3);
            }
        });
        cur = std::move(next);
    }

    KahanSum last;
    for (std::uint64_t i = 1; i < n; ++i) last.add(cur[i] * w[n - i]);

    CompositionSum out;
    out.value = last.value();
    out.prediction = gamma_main_constant(ell, omega) *
                     std::pow(nd, static_cast<double>(ell) * omega - 1.0);
    return out;
}

ArcSet major_arcs(std::uint64_t N, double C_exp) {
    if (N < 100) throw ConfigError("bad_N", "major_arcs needs N >= 100");
    return major_arcs_with_Q(N, std::pow(std::log(static_cast<double>(N)), C_exp));
}

ArcSet major_arcs_with_Q(std::uint64_t N, double Q) {
    if (N < 100) throw ConfigError("bad_N", "major_arcs needs N >= 100");
    if (!(Q >= 1.0)) throw ConfigError("bad_Q", "major_arcs needs Q >= 1");
    const double Nd = static_cast<double>(N);
    if (Q * Q * Q >= Nd)
        throw ConfigError("arcs_overlap",
                          fmt::format("Q = {:.15g} violates Q < N^(1/3) for N = {}", Q, N));

    ArcSet set;
    set.N = N;
    set.Q = Q;
    set.q_max = static_cast<std::uint64_t>(std::floor(Q));
    const double hw = Q / Nd;
    set.arcs.push_back({1, 0, 0.0, hw});
    for (std::uint64_t q = 2; q <= set.q_max; ++q)
        for (std::uint64_t a = 1; a < q; ++a)
            if (std::gcd(a, q) == 1)
                set.arcs.push_back({q, a, static_cast<double>(a) / static_cast<double>(q), hw});
    set.arcs.push_back({1, 1, 1.0, hw});
    std::sort(set.arcs.begin(), set.arcs.end(),
              [](const Arc& x, const Arc& y) { return x.a * y.q < y.a * x.q; });

    for (std::size_t i = 0; i + 1 < set.arcs.size(); ++i)
        if (set.arcs[i].hi() >= set.arcs[i + 1].lo())
            throw ConfigError("arcs_overlap",
                              fmt::format("arcs at {}/{} and {}/{} overlap for Q = {:.15g}, N = {}",
                                          set.arcs[i].a, set.arcs[i].q, set.arcs[i + 1].a,
                                          set.arcs[i + 1].q, Q, N));
    KahanSum measure;
    for (const Arc& arc : set.arcs)
        measure.add(std::min(arc.hi(), 1.0) - std::max(arc.lo(), 0.0));
    set.total_measure = measure.value();
    return set;
}

}  // namespace subbasis

#include "subbasis/singular.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "subbasis/basesets.hpp"
#include "subbasis/error.hpp"
#include "subbasis/numeric.hpp"
#include "subbasis/parallel.hpp"

namespace subbasis {

std::string_view to_string(SeriesVariant v) {
    return v == SeriesVariant::Waring ? "waring" : "wg";
}

SeriesVariant parse_series_variant(std::string_view text) {
    if (text == "waring" || text == "w") return SeriesVariant::Waring;
    if (text == "wg" || text == "waring-goldbach" || text == "goldbach")
        return SeriesVariant::WaringGoldbach;
    throw ConfigError("bad_variant", fmt::format("unknown series variant '{}'", text));
}

std::complex<double> gauss_sum(std::uint64_t a, std::uint64_t q, unsigned k, bool restricted) {
    constexpr std::uint64_t kMaxModulus = 10'000'000;
    if (q < 1 || a < 1 || a > q) throw ConfigError("bad_residue", "gauss_sum needs 1 <= a <= q");
    if (q > kMaxModulus)
        throw SizeError("modulus_too_large",
                        fmt::format("gauss_sum needs q <= {}, got {}", kMaxModulus, q));
    ComplexKahanSum acc;
    for (std::uint64_t r = 1; r <= q; ++r) {
        if (restricted && std::gcd(r, q) != 1) continue;
        acc.add(unit_phase_ratio(mulmod(a % q, powmod(r, k, q), q), q));
    }
    return acc.value();
}

namespace {

std::complex<double> complex_power(std::complex<double> z, unsigned h) {
    std::complex<double> result{1.0, 0.0};
    for (int bit = std::bit_width(h) - 1; bit >= 0; --bit) {
        result *= result;
        if ((h >> bit) & 1u) result *= z;
    }
    return result;
}

void check_series_args(unsigned k, unsigned h, std::uint64_t Q) {
    if (k < 1) throw ConfigError("bad_exponent", "singular series needs k >= 1");
    if (h < 2) throw ConfigError("bad_h", "singular series needs h >= 2");
    if (Q < 1) throw ConfigError("bad_Q", "singular series needs Q >= 1");
    if (Q > std::numeric_limits<std::uint32_t>::max())
        throw ResourceError("work_budget", "truncation bound Q too large");
}

constexpr std::uint32_t kNoCoset = std::numeric_limits<std::uint32_t>::max();

// Per-modulus data: (G(a,q)/D)^h for each unit a, stored per coset of the
// k-th power units, plus the table e(j/q).
struct ModulusData {
    std::uint64_t q = 1;
    std::uint64_t phi = 1;
    std::vector<std::uint32_t> units;         // ascending
    std::vector<std::uint32_t> coset_of;      // per residue; kNoCoset off the units
    std::vector<std::complex<double>> coef;   // per coset
    std::vector<std::complex<double>> phase;  // e(j/q), j in [0, q)
    std::vector<std::uint64_t> powers;        // subgroup of k-th power units
};

ModulusData modulus_data(SeriesVariant variant, std::uint64_t q, unsigned k, unsigned h) {
    ModulusData d;
    d.q = q;
    if (q == 1) {
        d.units = {0};
        d.coset_of = {0};
        d.coef = {{1.0, 0.0}};
        d.phase = {{1.0, 0.0}};
        return d;
    }
    const bool restricted = variant == SeriesVariant::WaringGoldbach;
    std::vector<char> is_unit(q, 0);
    for (std::uint64_t a = 1; a < q; ++a)
        if (std::gcd(a, q) == 1) {
            is_unit[a] = 1;
            d.units.push_back(static_cast<std::uint32_t>(a));
        }
    d.phi = d.units.size();

    d.phase.resize(q);
    for (std::uint64_t j = 0; j < q; ++j) d.phase[j] = unit_phase_ratio(j, q);

    // Histogram of r^k mod q over the summation range of the Gauss sum.
    std::vector<std::uint32_t> hist(q, 0);
    for (std::uint64_t r = 1; r <= q; ++r) {
        if (restricted && !is_unit[r % q]) continue;
        ++hist[powmod(r, k, q)];
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> residues;  // (m, count)
    for (std::uint64_t m = 0; m < q; ++m)
        if (hist[m]) residues.emplace_back(static_cast<std::uint32_t>(m), hist[m]);

    // Subgroup of k-th power units; G(a t^k, q) = G(a, q).
    std::vector<char> in_sub(q, 0);
    std::vector<std::uint64_t>& sub = d.powers;
    for (std::uint64_t t : d.units) {
        const std::uint64_t v = powmod(t, k, q);
        if (!in_sub[v]) {
            in_sub[v] = 1;
            sub.push_back(v);
        }
    }

    std::vector<std::uint32_t>& coset_of = d.coset_of;
    coset_of.assign(q, kNoCoset);
    const double D = restricted ? static_cast<double>(d.phi) : static_cast<double>(q);
    for (std::uint64_t a : d.units) {
        if (coset_of[a] != kNoCoset) continue;
        const auto id = static_cast<std::uint32_t>(d.coef.size());
        for (std::uint64_t s : sub) coset_of[mulmod(a, s, q)] = id;
        ComplexKahanSum g;
        for (const auto& [m, count] : residues)
            g.add(static_cast<double>(count) * d.phase[mulmod(a, m, q)]);
        d.coef.push_back(complex_power(g.value() / D, h));
    }
    return d;
}

// A(q; n) for the given n, using e(-na/q) = conj(e(na/q)).
std::complex<double> local_term(const ModulusData& d, std::uint64_t n) {
    if (d.q == 1) return d.coef[0];
    const std::uint64_t nm = n % d.q;
    double re = 0.0, im = 0.0;
    std::uint64_t j = 0;  // n a mod q
    for (std::uint64_t a = 1; a < d.q; ++a) {
        j += nm;
        if (j >= d.q) j -= d.q;
        const std::uint32_t c = d.coset_of[a];
        if (c == kNoCoset) continue;
        const double cr = d.coef[c].real(), ci = d.coef[c].imag();
        const double pr = d.phase[j].real(), pi = d.phase[j].imag();
        re += cr * pr + ci * pi;
        im += ci * pr - cr * pi;
    }
    return {re, im};
}

double estimated_work(std::uint64_t Q, std::size_t n_count) {
    // sum_{q <= Q} (q log q + phi(q) n_count), with phi(q) ~ 0.61 q on average.
    const double Qd = static_cast<double>(Q);
    return 0.5 * Qd * Qd * (1.0 + 0.61 * static_cast<double>(n_count));
}

// terms[(q-1) * n_count + i] = A(q; ns[i]).
std::vector<std::complex<double>> all_terms(SeriesVariant variant,
                                            std::span<const std::uint64_t> ns, unsigned k,
                                            unsigned h, std::uint64_t Q,
                                            const SingularOptions& options) {
    check_series_args(k, h, Q);
    const double work = estimated_work(Q, ns.size());
    if (work > options.work_budget)
        throw ResourceError("work_budget",
                            fmt::format("singular series up to Q = {} for {} targets needs ~{:.3g} "
                                        "operations, work budget is {:.3g}",
                                        Q, ns.size(), work, options.work_budget));
    const std::uint64_t bytes = Q * ns.size() * sizeof(std::complex<double>);
    if (bytes > options.memory_budget)
        throw ResourceError("memory_budget",
                            fmt::format("singular series term storage needs {} bytes, memory "
                                        "budget is {} bytes",
                                        bytes, options.memory_budget));

    std::vector<std::complex<double>> terms(Q * ns.size());
    // Each q writes only its own slots, so the partition is free to vary.
    constexpr std::uint64_t kBlock = 64;
    const std::uint64_t n_blocks = (Q + kBlock - 1) / kBlock;
    parallel_blocks(n_blocks, [&](std::size_t b) {
        // Interleave so that every block mixes small and large q.
        for (std::uint64_t q = b + 1; q <= Q; q += n_blocks) {
            const ModulusData d = modulus_data(variant, q, k, h);
            for (std::size_t i = 0; i < ns.size(); ++i)
                terms[(q - 1) * ns.size() + i] = local_term(d, ns[i]);
        }
    });
    return terms;
}

std::uint64_t totient_sum(std::uint64_t Q) {
    std::vector<std::uint64_t> phi(Q + 1);
    std::iota(phi.begin(), phi.end(), std::uint64_t{0});
    for (std::uint64_t p = 2; p <= Q; ++p)
        if (phi[p] == p)
            for (std::uint64_t m = p; m <= Q; m += p) phi[m] -= phi[m] / p;
    std::uint64_t s = 0;
    for (std::uint64_t q = 1; q <= Q; ++q) s += phi[q];
    return s;
}

SingularValue make_value(SeriesVariant variant, std::uint64_t n, unsigned k, unsigned h,
                         std::uint64_t Q, std::complex<double> total, std::uint64_t terms) {
    SingularValue v;
    v.variant = variant;
    v.n = n;
    v.k = k;
    v.h = h;
    v.Q = Q;
    v.value = total.real();
    v.imag_residual = std::abs(total.imag());
    v.terms = terms;
    v.below_h_star = variant == SeriesVariant::WaringGoldbach && h < h_star(k);
    return v;
}

}  // namespace

std::vector<SingularValue> singular_series_batch(SeriesVariant variant,
                                                 std::span<const std::uint64_t> ns, unsigned k,
                                                 unsigned h, std::uint64_t Q,
                                                 const SingularOptions& options) {
    std::vector<SingularValue> out;
    if (ns.empty()) return out;
    const auto terms = all_terms(variant, ns, k, h, Q, options);
    const std::uint64_t count = totient_sum(Q);
    out.reserve(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        ComplexKahanSum acc;
        for (std::uint64_t q = 1; q <= Q; ++q) acc.add(terms[(q - 1) * ns.size() + i]);
        out.push_back(make_value(variant, ns[i], k, h, Q, acc.value(), count));
    }
    return out;
}

SingularValue singular_series(SeriesVariant variant, std::uint64_t n, unsigned k, unsigned h,
                              std::uint64_t Q, const SingularOptions& options) {
    const std::uint64_t ns[1] = {n};
    return singular_series_batch(variant, ns, k, h, Q, options).front();
}

std::vector<std::pair<std::uint64_t, double>> truncation_profile(
    SeriesVariant variant, std::uint64_t n, unsigned k, unsigned h,
    std::span<const std::uint64_t> Q_list, const SingularOptions& options) {
    std::vector<std::pair<std::uint64_t, double>> out;
    if (Q_list.empty()) return out;
    for (std::size_t i = 0; i < Q_list.size(); ++i)
        if (Q_list[i] < 1 || (i > 0 && Q_list[i] <= Q_list[i - 1]))
            throw ConfigError("bad_Q", "truncation profile needs a strictly increasing Q list");
    const std::uint64_t ns[1] = {n};
    const auto terms = all_terms(variant, ns, k, h, Q_list.back(), options);
    ComplexKahanSum acc;
    std::uint64_t q = 0;
    for (std::uint64_t Q : Q_list) {
        while (q < Q) acc.add(terms[q++]);
        out.emplace_back(Q, acc.value().real());
    }
    return out;
}

SingularValue singular_series_reference(SeriesVariant variant, std::uint64_t n, unsigned k,
                                        unsigned h, std::uint64_t Q) {
    check_series_args(k, h, Q);
    const bool restricted = variant == SeriesVariant::WaringGoldbach;
    ComplexKahanSum acc;
    std::uint64_t count = 0;
    for (std::uint64_t q = 1; q <= Q; ++q) {
        const double D = restricted ? static_cast<double>(euler_phi(q)) : static_cast<double>(q);
        for (std::uint64_t a = 1; a <= q; ++a) {
            if (std::gcd(a, q) != 1) continue;
            const std::complex<double> g = gauss_sum(a, q, k, restricted) / D;
            acc.add(complex_power(g, h) * std::conj(unit_phase_ratio(mulmod(n % q, a, q), q)));
            ++count;
        }
    }
    return make_value(variant, n, k, h, Q, acc.value(), count);
}

SingularSeriesEvaluator::SingularSeriesEvaluator(SeriesVariant variant, unsigned k, unsigned h,
                                                 std::uint64_t Q, const SingularOptions& options)
    : variant_(variant), k_(k), h_(h), Q_(Q) {
    check_series_args(k, h, Q);
    constexpr std::uint64_t kNpos = std::numeric_limits<std::uint64_t>::max();

    // Smallest prime factor sieve.
    std::vector<std::uint32_t> spf(Q + 1, 0);
    for (std::uint64_t i = 2; i <= Q; ++i)
        if (spf[i] == 0)
            for (std::uint64_t j = i; j <= Q; j += i)
                if (spf[j] == 0) spf[j] = static_cast<std::uint32_t>(i);

    offset_.assign(Q + 1, kNpos);
    std::vector<std::uint64_t> prime_powers;
    double work = 0.0;
    std::uint64_t table_size = 0;
    for (std::uint64_t q = 2; q <= Q; ++q) {
        std::uint64_t m = q;
        const std::uint64_t p = spf[q];
        unsigned e = 0;
        for (; m % p == 0; ++e) m /= p;
        if (m != 1) continue;
        prime_powers.push_back(q);
        offset_[q] = table_size;
        table_size += q;
        // At most 2k orbits of residues per exact power of p dividing r.
        const double orbits = std::min(static_cast<double>(q), 2.0 * k * (e + 1));
        work += static_cast<double>(q) * orbits;
    }
    if (work > options.work_budget)
        throw ResourceError("work_budget",
                            fmt::format("prime-power tables up to Q = {} need ~{:.3g} operations, "
                                        "work budget is {:.3g}",
                                        Q, work, options.work_budget));
    if (table_size * sizeof(std::complex<double>) > options.memory_budget)
        throw ResourceError("memory_budget", "prime-power tables exceed the memory budget");
    table_.resize(table_size);

    parallel_blocks(prime_powers.size(), [&](std::size_t i) {
        const std::uint64_t q = prime_powers[i];
        const ModulusData d = modulus_data(variant_, q, k_, h_);
        std::complex<double>* row = table_.data() + offset_[q];
        // A(q; r s) = A(q; r) for every k-th power unit s: one term per orbit.
        std::vector<char> done(q, 0);
        for (std::uint64_t r = 0; r < q; ++r) {
            if (done[r]) continue;
            const std::complex<double> v = local_term(d, r);
            for (std::uint64_t s : d.powers) {
                const std::uint64_t rs = mulmod(r, s, q);
                row[rs] = v;
                done[rs] = 1;
            }
        }
    });

    factor_start_.assign(Q + 2, 0);
    for (std::uint64_t q = 1; q <= Q; ++q) {
        factor_start_[q] = static_cast<std::uint32_t>(factors_.size());
        std::uint64_t m = q;
        while (m > 1) {
            const std::uint64_t p = spf[m];
            std::uint64_t pe = 1;
            while (m % p == 0) {
                m /= p;
                pe *= p;
            }
            factors_.push_back(static_cast<std::uint32_t>(pe));
        }
    }
    factor_start_[Q + 1] = static_cast<std::uint32_t>(factors_.size());
    terms_ = totient_sum(Q);
}

std::complex<double> SingularSeriesEvaluator::local_factor(std::uint64_t q, std::uint64_t r) const {
    if (q == 1) return {1.0, 0.0};
    if (q > Q_ || offset_[q] == std::numeric_limits<std::uint64_t>::max())
        throw ConfigError("bad_modulus", fmt::format("{} is not a tabulated prime power", q));
    return table_[offset_[q] + r % q];
}

SingularValue SingularSeriesEvaluator::operator()(std::uint64_t n) const {
    ComplexKahanSum acc;
    acc.add({1.0, 0.0});
    for (std::uint64_t q = 2; q <= Q_; ++q) {
        std::complex<double> t{1.0, 0.0};
        for (std::uint32_t i = factor_start_[q]; i < factor_start_[q + 1]; ++i) {
            const std::uint64_t pe = factors_[i];
            const std::complex<double> f = table_[offset_[pe] + n % pe];
            t = {t.real() * f.real() - t.imag() * f.imag(),
                 t.real() * f.imag() + t.imag() * f.real()};
        }
        acc.add(t);
    }
    return make_value(variant_, n, k_, h_, Q_, acc.value(), terms_);
}

}  // namespace subbasis

#include "subbasis/repcount.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "subbasis/convolution.hpp"
#include "subbasis/error.hpp"
#include "subbasis/numeric.hpp"

namespace subbasis {

std::string_view to_string(CountMethod m) {
    switch (m) {
        case CountMethod::Naive: return "naive";
        case CountMethod::MeetInMiddle: return "mim";
        case CountMethod::Convolution: return "convolution";
    }
    return "?";
}

CountMethod parse_count_method(std::string_view text) {
    if (text == "naive") return CountMethod::Naive;
    if (text == "mim" || text == "meet-in-middle") return CountMethod::MeetInMiddle;
    if (text == "convolution" || text == "fft") return CountMethod::Convolution;
    throw ConfigError("bad_method", fmt::format("unknown counting method '{}'", text));
}

namespace {

std::uint64_t factorial(unsigned n) {
    std::uint64_t f = 1;
    for (unsigned i = 2; i <= n; ++i) f *= i;
    return f;
}

void check_set(std::span<const std::uint64_t> A) {
    for (std::size_t i = 0; i < A.size(); ++i)
        if (A[i] < 1 || (i > 0 && A[i] <= A[i - 1]))
            throw ConfigError("bad_set", "element list must be strictly increasing and >= 1");
}

// Visits every non-decreasing index tuple of length h with element sum <= N,
// passing the sum, the number of its distinct orderings and the weight
// product (1 when weights is empty).
void for_each_sorted_tuple(std::span<const std::uint64_t> A, std::span<const double> weights,
                           unsigned h, std::uint64_t N,
                           const std::function<void(std::uint64_t, std::uint64_t, double)>& visit) {
    const std::uint64_t hfact = factorial(h);
    // denom = prod over runs of (run length)!
    std::function<void(unsigned, std::size_t, std::uint64_t, std::uint64_t, unsigned, double)> rec =
        [&](unsigned depth, std::size_t start, std::uint64_t sum, std::uint64_t denom,
            unsigned run, double wprod) {
            if (depth == h) {
                visit(sum, hfact / denom, wprod);
                return;
            }
            const unsigned remaining = h - depth;
            for (std::size_t i = start; i < A.size(); ++i) {
                if (sum + A[i] * remaining > N) break;
                const bool repeat = depth > 0 && i == start;
                const unsigned new_run = repeat ? run + 1 : 1;
                const std::uint64_t new_denom = repeat ? denom * new_run : denom;
                const double w = weights.empty() ? 1.0 : weights[i];
                rec(depth + 1, i, sum + A[i], new_denom, new_run, wprod * w);
            }
        };
    rec(0, 0, 0, 1, 0, 1.0);
}

// Ordered-tuple table for h parts by sorted enumeration.
void naive_table(std::span<const std::uint64_t> A, std::span<const double> weights, unsigned h,
                 std::uint64_t N, RepTable& t) {
    if (!t.weighted) {
        for_each_sorted_tuple(A, {}, h, N,
                              [&](std::uint64_t s, std::uint64_t ord, double) { t.counts[s] += ord; });
        return;
    }
    std::vector<KahanSum> acc(N + 1);
    for_each_sorted_tuple(A, weights, h, N, [&](std::uint64_t s, std::uint64_t ord, double w) {
        acc[s].add(static_cast<double>(ord) * w);
    });
    for (std::uint64_t n = 0; n <= N; ++n) t.sums[n] = acc[n].value();
}

struct SumList {
    std::vector<std::uint64_t> sums;  // ascending, distinct
    std::vector<std::uint64_t> counts;
    std::vector<double> weights;
};

SumList half_list(std::span<const std::uint64_t> A, std::span<const double> weights, unsigned h,
                  std::uint64_t N, bool weighted) {
    RepTable t;
    t.weighted = weighted;
    if (weighted)
        t.sums.assign(N + 1, 0.0);
    else
        t.counts.assign(N + 1, 0);
    naive_table(A, weights, h, N, t);
    SumList out;
    for (std::uint64_t s = 0; s <= N; ++s) {
        if (weighted ? t.sums[s] == 0.0 : t.counts[s] == 0) continue;
        out.sums.push_back(s);
        if (weighted)
            out.weights.push_back(t.sums[s]);
        else
            out.counts.push_back(t.counts[s]);
    }
    return out;
}

void mim_table(std::span<const std::uint64_t> A, std::span<const double> weights, unsigned h,
               std::uint64_t N, RepTable& t) {
    const unsigned h1 = (h + 1) / 2, h2 = h / 2;
    const SumList L = half_list(A, weights, h1, N, t.weighted);
    const SumList R = half_list(A, weights, h2, N, t.weighted);
    if (!t.weighted) {
        for (std::size_t i = 0; i < L.sums.size(); ++i)
            for (std::size_t j = 0; j < R.sums.size() && L.sums[i] + R.sums[j] <= N; ++j)
                t.counts[L.sums[i] + R.sums[j]] += L.counts[i] * R.counts[j];
        return;
    }
    std::vector<KahanSum> acc(N + 1);
    for (std::size_t i = 0; i < L.sums.size(); ++i)
        for (std::size_t j = 0; j < R.sums.size() && L.sums[i] + R.sums[j] <= N; ++j)
            acc[L.sums[i] + R.sums[j]].add(L.weights[i] * R.weights[j]);
    for (std::uint64_t n = 0; n <= N; ++n) t.sums[n] = acc[n].value();
}

void convolution_table(std::span<const std::uint64_t> A, std::span<const double> weights,
                       unsigned h, std::uint64_t N, const RepOptions& options, RepTable& t) {
    std::vector<double> v(N + 1, 0.0);
    for (std::size_t i = 0; i < A.size() && A[i] <= N; ++i)
        v[A[i]] = t.weighted ? weights[i] : 1.0;
    ConvolutionOptions co;
    co.memory_budget = options.memory_budget;
    co.integer = !t.weighted;
    const auto out = convolution_power(v, h, N + 1, co);
    if (t.weighted) {
        // Entries below the FFT round-off floor are indistinguishable from 0.
        double peak = 0.0;
        for (double x : out) peak = std::max(peak, std::abs(x));
        const double floor = 16.0 * std::numeric_limits<double>::epsilon() * h *
                             std::log2(static_cast<double>(N + 2)) * peak;
        t.sums = out;
        for (double& x : t.sums)
            if (std::abs(x) <= floor) x = 0.0;
        return;
    }
    for (std::uint64_t n = 0; n <= N; ++n) {
        if (out[n] < 0.0)
            throw SizeError("precision", "negative count after FFT rounding");
        t.counts[n] = static_cast<std::uint64_t>(out[n]);
    }
}

RepTable build(std::span<const std::uint64_t> A, std::span<const double> weights, unsigned h,
               std::uint64_t N, CountMethod method, bool weighted, const RepOptions& options) {
    check_set(A);
    if (h < 1) throw ConfigError("bad_h", "rep_table needs h >= 1");
    if (weighted && weights.size() != A.size())
        throw ConfigError("bad_weights", "one weight per element is required");
    const std::uint64_t bytes = (N + 1) * 8;
    if (bytes > options.memory_budget)
        throw ResourceError("memory_budget",
                            fmt::format("table up to N = {} needs {} bytes, memory budget is {} bytes",
                                        N, bytes, options.memory_budget));
    RepTable t;
    t.h = h;
    t.N = N;
    t.method = method;
    t.weighted = weighted;
    if (weighted)
        t.sums.assign(N + 1, 0.0);
    else
        t.counts.assign(N + 1, 0);
    switch (method) {
        case CountMethod::Naive: naive_table(A, weights, h, N, t); break;
        case CountMethod::MeetInMiddle: mim_table(A, weights, h, N, t); break;
        case CountMethod::Convolution: convolution_table(A, weights, h, N, options, t); break;
    }
    return t;
}

// Calls visit on every non-decreasing tuple (as element values) summing to n,
// in lexicographic order.
void for_each_sorted_solution(std::span<const std::uint64_t> A, unsigned h, std::uint64_t n,
                              const std::function<void(std::span<const std::uint64_t>)>& visit) {
    std::vector<std::uint64_t> tuple(h);
    std::function<void(unsigned, std::size_t, std::uint64_t)> rec = [&](unsigned depth,
                                                                       std::size_t start,
                                                                       std::uint64_t sum) {
        const unsigned remaining = h - depth;
        if (remaining == 1) {
            const std::uint64_t need = n - sum;
            if (need >= A[start] && std::binary_search(A.begin() + static_cast<std::ptrdiff_t>(start),
                                                       A.end(), need)) {
                tuple[depth] = need;
                visit(tuple);
            }
            return;
        }
        for (std::size_t i = start; i < A.size(); ++i) {
            if (sum + A[i] * remaining > n) break;
            tuple[depth] = A[i];
            rec(depth + 1, i, sum + A[i]);
        }
    };
    if (h == 0 || A.empty()) return;
    rec(0, 0, 0);
}

std::uint64_t orderings(std::span<const std::uint64_t> sorted_tuple) {
    std::uint64_t denom = 1;
    unsigned run = 1;
    for (std::size_t i = 1; i < sorted_tuple.size(); ++i) {
        run = sorted_tuple[i] == sorted_tuple[i - 1] ? run + 1 : 1;
        denom *= run;
    }
    return factorial(static_cast<unsigned>(sorted_tuple.size())) / denom;
}

bool has_repeat(std::span<const std::uint64_t> sorted_tuple) {
    return std::adjacent_find(sorted_tuple.begin(), sorted_tuple.end()) != sorted_tuple.end();
}

// Ordered tuples of pairwise distinct elements with sum c_i x_i = n.
std::uint64_t weighted_distinct_count(std::span<const std::uint64_t> A,
                                      std::span<const unsigned> c, std::uint64_t n) {
    const std::size_t ell = c.size();
    std::vector<std::uint64_t> chosen(ell);
    std::uint64_t count = 0;
    std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t depth, std::uint64_t sum) {
        auto used = [&](std::uint64_t v) {
            return std::find(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(depth), v) !=
                   chosen.begin() + static_cast<std::ptrdiff_t>(depth);
        };
        if (depth + 1 == ell) {
            const std::uint64_t rest = n - sum;
            if (rest % c[depth] != 0) return;
            const std::uint64_t v = rest / c[depth];
            if (v >= 1 && std::binary_search(A.begin(), A.end(), v) && !used(v)) ++count;
            return;
        }
        // Remaining coordinates each contribute at least c_j * min(A).
        std::uint64_t reserve = 0;
        for (std::size_t j = depth + 1; j < ell; ++j) reserve += c[j] * A.front();
        for (std::uint64_t a : A) {
            if (sum + c[depth] * a + reserve > n) break;
            if (used(a)) continue;
            chosen[depth] = a;
            rec(depth + 1, sum + c[depth] * a);
        }
    };
    if (A.empty() || ell == 0) return 0;
    rec(0, 0);
    return count;
}

void compositions(unsigned h, std::vector<unsigned>& prefix,
                  std::vector<std::vector<unsigned>>& out) {
    if (h == 0) {
        out.push_back(prefix);
        return;
    }
    for (unsigned first = 1; first <= h; ++first) {
        prefix.push_back(first);
        compositions(h - first, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

RepTable rep_table(std::span<const std::uint64_t> A, unsigned h, std::uint64_t N,
                   CountMethod method, const RepOptions& options) {
    return build(A, {}, h, N, method, false, options);
}

RepTable rep_table_weighted(std::span<const std::uint64_t> A, std::span<const double> weights,
                            unsigned h, std::uint64_t N, CountMethod method,
                            const RepOptions& options) {
    return build(A, weights, h, N, method, true, options);
}

std::uint64_t count_representations(std::span<const std::uint64_t> A, unsigned h,
                                    std::uint64_t n) {
    check_set(A);
    std::uint64_t total = 0;
    for_each_sorted_solution(A, h, n, [&](std::span<const std::uint64_t> t) { total += orderings(t); });
    return total;
}

Decomposition exact_decomposition(std::span<const std::uint64_t> A, unsigned h, std::uint64_t n) {
    if (h > 8) throw SizeError("h_too_large", fmt::format("decomposition needs h <= 8, got {}", h));
    if (h < 1) throw ConfigError("bad_h", "decomposition needs h >= 1");
    check_set(A);
    Decomposition d;
    d.r = count_representations(A, h, n);

    std::vector<std::vector<unsigned>> comps;
    std::vector<unsigned> prefix;
    compositions(h, prefix, comps);
    const std::uint64_t hfact = factorial(h);
    std::vector<unsigned __int128> per_length(h + 1, 0);
    for (auto& c : comps) {
        const std::uint64_t rho = weighted_distinct_count(A, c, n);
        if (c.size() == h) {
            d.rho = rho;
            continue;
        }
        std::uint64_t denom = 1;
        for (unsigned part : c) denom *= factorial(part);
        CompositionTerm term{c, rho, hfact / denom};
        per_length[c.size()] += static_cast<unsigned __int128>(term.multiplicity) * rho;
        d.terms.push_back(std::move(term));
    }
    unsigned __int128 non_exact = 0;
    for (unsigned ell = 1; ell < h; ++ell) {
        const std::uint64_t lf = factorial(ell);
        if (per_length[ell] % lf != 0)
            throw Error("internal", "composition sum not divisible by l!");
        non_exact += per_length[ell] / lf;
    }
    d.non_exact = static_cast<std::uint64_t>(non_exact);
    return d;
}

DeltaSplit delta_split(std::span<const std::uint64_t> A, unsigned h, std::uint64_t n, double delta) {
    if (n < 2) throw ConfigError("bad_n", "delta_split needs n >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("bad_delta", "delta must lie in (0, 1)");
    const double threshold = std::pow(static_cast<double>(n), delta);
    const auto first = std::find_if(A.begin(), A.end(),
                                    [&](std::uint64_t a) { return static_cast<double>(a) >= threshold; });
    const std::span<const std::uint64_t> large(first, A.end());
    DeltaSplit s;
    const std::uint64_t r = count_representations(A, h, n);
    s.normal = count_representations(large, h, n);
    s.small = r - s.normal;
    return s;
}

namespace {

std::vector<std::uint64_t> greedy_family(std::span<const std::uint64_t> A, unsigned h,
                                         std::uint64_t n, bool exact_only, std::uint64_t& size) {
    std::vector<std::uint64_t> used;  // sorted
    size = 0;
    for_each_sorted_solution(A, h, n, [&](std::span<const std::uint64_t> t) {
        if (exact_only && has_repeat(t)) return;
        for (std::uint64_t v : t)
            if (std::binary_search(used.begin(), used.end(), v)) return;
        for (std::uint64_t v : t) used.insert(std::upper_bound(used.begin(), used.end(), v), v);
        ++size;
    });
    used.erase(std::unique(used.begin(), used.end()), used.end());
    return used;
}

}  // namespace

std::uint64_t maxdisfam_size(std::span<const std::uint64_t> A, unsigned h, std::uint64_t n,
                             bool exact_only) {
    check_set(A);
    std::uint64_t size = 0;
    greedy_family(A, h, n, exact_only, size);
    return size;
}

ChainBound chain_bound(std::span<const std::uint64_t> A, unsigned ell, std::uint64_t n) {
    if (ell < 2) throw ConfigError("bad_ell", "chain bound needs l >= 2");
    check_set(A);
    ChainBound b;
    b.r = count_representations(A, ell, n);
    const auto covered = greedy_family(A, ell, n, false, b.family);
    const RepTable lower = rep_table(A, ell - 1, n, CountMethod::Convolution);
    b.max_lower = *std::max_element(lower.counts.begin(), lower.counts.end());
    KahanSum hits;
    for (std::uint64_t x : covered) hits.add(static_cast<double>(lower.counts[n - x]));
    b.hit_sum = static_cast<double>(ell) * hits.value();
    const double fam = static_cast<double>(b.family), mx = static_cast<double>(b.max_lower);
    b.factorial_bound = static_cast<double>(factorial(ell)) * fam * mx;
    b.ordered_bound = static_cast<double>(ell) * static_cast<double>(ell) * fam * mx;
    return b;
}

unsigned __int128 additive_energy(std::span<const std::uint64_t> A, unsigned ell, std::uint64_t x,
                                  const RepOptions& options) {
    if (ell < 1) throw ConfigError("bad_ell", "additive energy needs l >= 1");
    check_set(A);
    const auto end = std::upper_bound(A.begin(), A.end(), x);
    const std::span<const std::uint64_t> part(A.begin(), end);
    const RepTable t = rep_table(part, ell, static_cast<std::uint64_t>(ell) * x,
                                 CountMethod::Convolution, options);
    unsigned __int128 energy = 0;
    for (std::uint64_t r : t.counts) {
        const unsigned __int128 sq = static_cast<unsigned __int128>(r) * r;
        if (energy + sq < energy) throw SizeError("overflow", "additive energy overflows 128 bits");
        energy += sq;
    }
    return energy;
}

}  // namespace subbasis

// repcount.hpp
//
// Representation counts r_{A,h}(n): the number of ORDERED h-tuples of
// elements of A summing to n, or the weighted analogue
// sum over those tuples of w(x_1) ... w(x_h).
//
// Three counting methods that must agree exactly on integer counts:
//   Naive         enumerate non-decreasing tuples, add h!/prod(mult!) each
//   MeetInMiddle  sum lists for ceil(h/2) and floor(h/2) tuples, merged
//   Convolution   h-th convolution power of the indicator via FFT

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace subbasis {

enum class CountMethod { Naive, MeetInMiddle, Convolution };

std::string_view to_string(CountMethod m);
CountMethod parse_count_method(std::string_view text);

struct RepOptions {
    std::uint64_t memory_budget = std::uint64_t{1} << 30;
};

struct RepTable {
    unsigned h = 2;
    std::uint64_t N = 0;
    CountMethod method = CountMethod::Convolution;
    bool weighted = false;
    std::vector<std::uint64_t> counts;  // unweighted, index n in [0, N]
    std::vector<double> sums;           // weighted, index n in [0, N]
};

// A must be strictly increasing with elements >= 1.
RepTable rep_table(std::span<const std::uint64_t> A, unsigned h, std::uint64_t N,
                   CountMethod method, const RepOptions& options = {});

// weights[i] is the weight of A[i].
RepTable rep_table_weighted(std::span<const std::uint64_t> A, std::span<const double> weights,
                            unsigned h, std::uint64_t N, CountMethod method,
                            const RepOptions& options = {});

// r_{A,h}(n) for a single n by enumeration; the last coordinate is looked up.
std::uint64_t count_representations(std::span<const std::uint64_t> A, unsigned h,
                                    std::uint64_t n);

struct CompositionTerm {
    std::vector<unsigned> parts;     // (c_1, ..., c_l), an ordered composition of h
    std::uint64_t rho = 0;           // ordered distinct l-tuples with sum c_i x_i = n
    std::uint64_t multiplicity = 0;  // h! / prod c_i!
};

// Exact/non-exact decomposition of r_{A,h}(n).
//
// A tuple with l distinct values of multiplicities c_1..c_l arises from
// l! pairs (ordered composition, ordered distinct tuple), and has
// h!/prod c_i! orderings, so
//   r = rho + sum_{l < h} (1/l!) sum_{|c| = l} (h!/prod c_i!) rho^(c).
struct Decomposition {
    std::uint64_t r = 0;
    std::uint64_t rho = 0;        // exact part: pairwise distinct coordinates
    std::uint64_t non_exact = 0;  // r - rho assembled from the composition terms
    std::vector<CompositionTerm> terms;  // all compositions with l < h
};

Decomposition exact_decomposition(std::span<const std::uint64_t> A, unsigned h, std::uint64_t n);

struct DeltaSplit {
    std::uint64_t small = 0;   // some coordinate < n^delta
    std::uint64_t normal = 0;  // every coordinate >= n^delta
};

DeltaSplit delta_split(std::span<const std::uint64_t> A, unsigned h, std::uint64_t n, double delta);

// Greedy maximal disjoint family: non-decreasing tuples in lexicographic
// order, keeping each one that shares no element with a kept tuple.
std::uint64_t maxdisfam_size(std::span<const std::uint64_t> A, unsigned h, std::uint64_t n,
                             bool exact_only);

struct ChainBound {
    std::uint64_t r = 0;            // r_{A,l}(n)
    std::uint64_t family = 0;       // greedy maxdisfam size
    std::uint64_t max_lower = 0;    // max_{m <= n} r_{A,l-1}(m)
    double hit_sum = 0.0;           // l * sum over kept S, x in S of r_{A,l-1}(n - x)
    double factorial_bound = 0.0;   // l! family max_lower
    double ordered_bound = 0.0;     // l^2 family max_lower
};

// The chain inequality r <= (family-based bounds), for l >= 2.
ChainBound chain_bound(std::span<const std::uint64_t> A, unsigned ell, std::uint64_t n);

// sum_n r_{A,l}(n)^2 over n <= l x, for the elements of A that are <= x.
unsigned __int128 additive_energy(std::span<const std::uint64_t> A, unsigned ell, std::uint64_t x,
                                  const RepOptions& options = {});

}  // namespace subbasis

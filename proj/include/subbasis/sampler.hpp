// sampler.hpp
//
// Random subsets A of a base set with independent inclusions
//   Pr(n in A) = min(1, c f(n) / B(n)),
// decided by n's own uniform variate from a counter-based generator keyed by
// the seed. Membership of n is a pure function of (parameters, seed, n), so
// the sampled set is the same for any thread count, and for c1 <= c2 the
// set at c1 is contained in the set at c2.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "subbasis/basesets.hpp"
#include "subbasis/regvar.hpp"

namespace subbasis {

// Philox4x32 with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Uniform in [0, 1) with 53 random bits, keyed by (seed, n).
double uniform_at(std::uint64_t seed, std::uint64_t n);

inline constexpr const char* kGeneratorName = "philox4x32-10";

struct SampledSubbasis {
    BaseSetSpec base;
    RegVarFn F;
    unsigned h = 2;
    double c = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t limit = 0;
    std::vector<std::uint64_t> elements;
    std::uint64_t clamp_count = 0;  // base elements with c f(n) / B(n) >= 1

    double omega() const { return (1.0 + F.kappa) / static_cast<double>(h); }
};

// Inclusion probability of the element of rank B (1-based) with value n.
double inclusion_probability(const TargetDensity& f, double c, std::uint64_t n, std::uint64_t B);

SampledSubbasis sample_subbasis(const SieveIndex& base, const TargetDensity& density, double c,
                                std::uint64_t seed, std::uint64_t limit);

struct CountingRow {
    std::uint64_t x = 0;
    std::uint64_t count = 0;  // |A intersect [1, x]|
    double predicted = 0.0;   // c (beta / omega) f(x)
    double ratio = 0.0;
    bool low_mass = false;    // x < 1e3: reported, not asserted
};

std::vector<CountingRow> counting_report(const SampledSubbasis& A,
                                         const std::vector<std::uint64_t>& checkpoints);

// Subbasis file: one header line
//   # base=<kind>,k=<k>,kappa=<kappa>,psi=<a>,<b>,c=<c>,h=<h>,seed=<seed>,limit=<limit>,
//     Fscale=<c_F>,rng=philox4x32-10
// then one element per line, ascending.
void write_subbasis(const std::filesystem::path& path, const SampledSubbasis& A);
std::string subbasis_header(const SampledSubbasis& A);
SampledSubbasis read_subbasis(const std::filesystem::path& path);

}  // namespace subbasis

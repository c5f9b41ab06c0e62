// basesets.hpp
//
// The two base sets studied here, k-th powers of naturals and k-th powers
// of primes, sieved into a sorted element list with an exact counting
// function B(x). Also the arithmetic constants attached to them: K(k),
// h*_k, the power-residue counts P_k(q,a) and primes in progressions.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace subbasis {

enum class BaseKind : std::uint8_t { PowersOfNaturals = 0, PowersOfPrimes = 1 };

std::string_view to_string(BaseKind kind);
BaseKind parse_base_kind(std::string_view text);

struct BaseSetSpec {
    BaseKind kind = BaseKind::PowersOfPrimes;
    unsigned k = 1;
    std::uint64_t limit = 100'000'000;

    // Regular-variation index of B(x).
    double beta() const { return 1.0 / static_cast<double>(k); }

    bool operator==(const BaseSetSpec&) const = default;
};

struct SieveOptions {
    // Upper bound on the bytes the element list may occupy.
    std::uint64_t memory_budget = std::uint64_t{1} << 30;
};

// Immutable sorted element list of a base set up to its limit.
class SieveIndex {
public:
    SieveIndex(BaseSetSpec spec, std::vector<std::uint64_t> elements);

    const BaseSetSpec& spec() const { return spec_; }
    std::span<const std::uint64_t> elements() const { return elements_; }
    std::size_t size() const { return elements_.size(); }

    // B(x) = number of elements <= x. Throws ResourceError for x > limit.
    std::uint64_t count(std::uint64_t x) const;

    bool contains(std::uint64_t n) const;

    // Elements <= x, as a prefix view.
    std::span<const std::uint64_t> elements_up_to(std::uint64_t x) const;

private:
    BaseSetSpec spec_;
    std::vector<std::uint64_t> elements_;
};

// Primes <= y, by a segmented odd-only sieve of Eratosthenes.
std::vector<std::uint64_t> primes_up_to(std::uint64_t y);

SieveIndex build_sieve(const BaseSetSpec& spec, const SieveOptions& options = {});

// Sieve cache: 16-byte header ("SBL1", kind byte, k byte, two zero bytes,
// limit as u64 LE) followed by the elements as u64 LE.
void save_sieve_cache(const std::filesystem::path& path, const SieveIndex& index);
SieveIndex load_sieve_cache(const std::filesystem::path& path);

// K(k) = prod over primes p with (p-1) | k of p^gamma(k,p).
std::uint64_t compute_K(unsigned k);

// h*_k: 2^k + 1 for k <= 11, else ceil(2k^2 (2 log k + log log k + 2.5)).
std::uint64_t h_star(unsigned k);

// P_k(q,a) = #{1 <= r <= q : r^k = a mod q}, by exhaustive scan (q <= 1e6).
std::uint64_t count_power_residues(std::uint64_t q, std::uint64_t a, unsigned k);

struct PrimeCountAP {
    std::uint64_t count = 0;  // pi(x; q, a)
    double main_term = 0.0;   // li(x) / phi(q)
};

// pi(x; q, a) read off a prime sieve (kind PowersOfPrimes, k = 1).
PrimeCountAP prime_count_AP(const SieveIndex& primes, std::uint64_t x, std::uint64_t q,
                            std::uint64_t a);

}  // namespace subbasis

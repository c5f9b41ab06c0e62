#include "subbasis/basesets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "subbasis/error.hpp"
#include "subbasis/numeric.hpp"

namespace subbasis {

std::string_view to_string(BaseKind kind) {
    return kind == BaseKind::PowersOfNaturals ? "naturals" : "primes";
}

BaseKind parse_base_kind(std::string_view text) {
    if (text == "naturals" || text == "N" || text == "n") return BaseKind::PowersOfNaturals;
    if (text == "primes" || text == "P" || text == "p") return BaseKind::PowersOfPrimes;
    throw ConfigError("bad_base", fmt::format("unknown base kind '{}'", text));
}

SieveIndex::SieveIndex(BaseSetSpec spec, std::vector<std::uint64_t> elements)
    : spec_(spec), elements_(std::move(elements)) {
    if (!std::is_sorted(elements_.begin(), elements_.end()) ||
        std::adjacent_find(elements_.begin(), elements_.end()) != elements_.end())
        throw ConfigError("bad_sieve", "sieve elements must be strictly increasing");
    if (!elements_.empty() && elements_.back() > spec_.limit)
        throw ConfigError("bad_sieve", "sieve element exceeds limit");
}

std::uint64_t SieveIndex::count(std::uint64_t x) const {
    if (x > spec_.limit)
        throw ResourceError("beyond_sieve",
                            fmt::format("B({}) requested but sieve limit is {}", x, spec_.limit));
    return static_cast<std::uint64_t>(std::upper_bound(elements_.begin(), elements_.end(), x) -
                                      elements_.begin());
}

bool SieveIndex::contains(std::uint64_t n) const {
    return std::binary_search(elements_.begin(), elements_.end(), n);
}

std::span<const std::uint64_t> SieveIndex::elements_up_to(std::uint64_t x) const {
    const auto end = std::upper_bound(elements_.begin(), elements_.end(), x);
    return {elements_.data(), static_cast<std::size_t>(end - elements_.begin())};
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t y) {
    std::vector<std::uint64_t> primes;
    if (y < 2) return primes;
    primes.push_back(2);
    if (y < 3) return primes;

    const std::uint64_t root = integer_root(y, 2);
    // Base odd primes up to sqrt(y) with a plain sieve.
    std::vector<char> small(root + 1, 1);
    std::vector<std::uint64_t> base;
    for (std::uint64_t i = 3; i <= root; i += 2) {
        if (!small[i]) continue;
        base.push_back(i);
        for (std::uint64_t j = i * i; j <= root; j += 2 * i) small[j] = 0;
    }

    // Segments cover odd numbers; byte s stands for low + 2s.
    constexpr std::uint64_t kSegment = std::uint64_t{1} << 18;
    std::vector<char> seg(kSegment);
    for (std::uint64_t low = 3; low <= y; low += 2 * kSegment) {
        const std::uint64_t high = std::min(y, low + 2 * kSegment - 1);
        const std::uint64_t count = (high - low) / 2 + 1;
        std::fill(seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(count), 1);
        for (std::uint64_t p : base) {
            if (p * p > high) break;
            std::uint64_t start = std::max(p * p, (low + p - 1) / p * p);
            if (start % 2 == 0) start += p;
            for (std::uint64_t j = start; j <= high; j += 2 * p) seg[(j - low) / 2] = 0;
        }
        for (std::uint64_t s = 0; s < count; ++s)
            if (seg[s]) primes.push_back(low + 2 * s);
    }
    return primes;
}

namespace {

std::uint64_t estimated_element_count(const BaseSetSpec& spec) {
    const std::uint64_t root = integer_root(spec.limit, spec.k);
    if (spec.kind == BaseKind::PowersOfNaturals) return root;
    if (root < 17) return 8;
    return static_cast<std::uint64_t>(1.26 * static_cast<double>(root) /
                                      std::log(static_cast<double>(root))) + 8;
}

std::uint64_t checked_pow(std::uint64_t m, unsigned k) {
    unsigned __int128 acc = 1;
    for (unsigned i = 0; i < k; ++i) acc *= m;
    return static_cast<std::uint64_t>(acc);
}

}  // namespace

SieveIndex build_sieve(const BaseSetSpec& spec, const SieveOptions& options) {
    if (spec.k < 1) throw ConfigError("bad_exponent", "base set exponent k must be >= 1");
    if (spec.limit < 2) throw ConfigError("bad_limit", "sieve limit must be >= 2");
    const std::uint64_t bytes = estimated_element_count(spec) * sizeof(std::uint64_t);
    if (bytes > options.memory_budget)
        throw ResourceError("memory_budget",
                            fmt::format("sieve of {} k={} up to {} needs ~{} bytes, memory budget "
                                        "is {} bytes",
                                        to_string(spec.kind), spec.k, spec.limit, bytes,
                                        options.memory_budget));

    const std::uint64_t root = integer_root(spec.limit, spec.k);
    std::vector<std::uint64_t> elements;
    if (spec.kind == BaseKind::PowersOfNaturals) {
        elements.reserve(root);
        for (std::uint64_t m = 1; m <= root; ++m) elements.push_back(checked_pow(m, spec.k));
    } else {
        elements = primes_up_to(root);
        if (spec.k > 1)
            for (auto& p : elements) p = checked_pow(p, spec.k);
    }
    return SieveIndex(spec, std::move(elements));
}

namespace {
constexpr std::array<char, 4> kMagic{'S', 'B', 'L', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint64_t get_u64(const unsigned char* b) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
}  // namespace

void save_sieve_cache(const std::filesystem::path& path, const SieveIndex& index) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("io", fmt::format("cannot write sieve cache '{}'", path.string()));
    out.write(kMagic.data(), 4);
    const std::array<char, 4> tail{static_cast<char>(index.spec().kind),
                                   static_cast<char>(index.spec().k), 0, 0};
    out.write(tail.data(), 4);
    put_u64(out, index.spec().limit);
    for (std::uint64_t e : index.elements()) put_u64(out, e);
    if (!out) throw ConfigError("io", fmt::format("short write to '{}'", path.string()));
}

SieveIndex load_sieve_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("io", fmt::format("cannot read sieve cache '{}'", path.string()));
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0 ||
        (bytes.size() - 16) % 8 != 0)
        throw ConfigError("bad_cache", fmt::format("'{}' is not a sieve cache", path.string()));
    if (bytes[4] > 1) throw ConfigError("bad_cache", "unknown base kind in sieve cache");
    BaseSetSpec spec{static_cast<BaseKind>(bytes[4]), bytes[5], get_u64(bytes.data() + 8)};
    std::vector<std::uint64_t> elements((bytes.size() - 16) / 8);
    for (std::size_t i = 0; i < elements.size(); ++i)
        elements[i] = get_u64(bytes.data() + 16 + 8 * i);
    return SieveIndex(spec, std::move(elements));
}

std::uint64_t compute_K(unsigned k) {
    if (k < 1) throw ConfigError("bad_exponent", "compute_K: k must be >= 1");
    unsigned __int128 K = 1;
    for (unsigned d = 1; d <= k; ++d) {
        if (k % d != 0) continue;
        const std::uint64_t p = d + 1;
        if (!is_prime_trial(p)) continue;
        unsigned theta = 0;
        for (unsigned m = k; m % p == 0; m /= static_cast<unsigned>(p)) ++theta;
        const unsigned gamma = (p == 2 && k % 2 == 0) ? theta + 2 : theta + 1;
        for (unsigned i = 0; i < gamma; ++i) {
            K *= p;
            if (K > std::numeric_limits<std::uint64_t>::max())
                throw SizeError("overflow", fmt::format("K({}) exceeds 64 bits", k));
        }
    }
    return static_cast<std::uint64_t>(K);
}

std::uint64_t h_star(unsigned k) {
    if (k < 1) throw ConfigError("bad_exponent", "h_star: k must be >= 1");
    if (k <= 11) return (std::uint64_t{1} << k) + 1;
    const double kk = static_cast<double>(k);
    return static_cast<std::uint64_t>(
        std::ceil(2.0 * kk * kk * (2.0 * std::log(kk) + std::log(std::log(kk)) + 2.5)));
}

std::uint64_t count_power_residues(std::uint64_t q, std::uint64_t a, unsigned k) {
    constexpr std::uint64_t kScanBound = 1'000'000;
    if (q < 1 || a >= q) throw ConfigError("bad_residue", "need q >= 1 and 0 <= a < q");
    if (q > kScanBound)
        throw SizeError("scan_bound",
                        fmt::format("P_k(q,a) scan needs q <= {}, got {}", kScanBound, q));
    std::uint64_t count = 0;
    for (std::uint64_t r = 1; r <= q; ++r)
        if (powmod(r, k, q) == a) ++count;
    return count;
}

PrimeCountAP prime_count_AP(const SieveIndex& primes, std::uint64_t x, std::uint64_t q,
                            std::uint64_t a) {
    if (primes.spec().kind != BaseKind::PowersOfPrimes || primes.spec().k != 1)
        throw ConfigError("bad_base", "prime_count_AP needs a prime sieve with k = 1");
    if (x < 2 || q < 1 || a < 1 || a > q || std::gcd(a, q) != 1)
        throw ConfigError("bad_progression", "need x >= 2, 1 <= a <= q, gcd(a,q) = 1");
    if (x > primes.spec().limit)
        throw ResourceError("beyond_sieve", fmt::format("x = {} exceeds sieve limit {}", x,
                                                        primes.spec().limit));
    PrimeCountAP out;
    const std::uint64_t residue = a % q;
    for (std::uint64_t p : primes.elements_up_to(x))
        if (p % q == residue) ++out.count;
    out.main_term = logarithmic_integral(static_cast<double>(x)) /
                    static_cast<double>(euler_phi(q));
    return out;
}

}  // namespace subbasis

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "doctest.h"
#include "subbasis/basesets.hpp"
#include "subbasis/error.hpp"
#include "subbasis/numeric.hpp"

using namespace subbasis;

namespace {

std::vector<std::uint64_t> elems(const SieveIndex& s) {
    return {s.elements().begin(), s.elements().end()};
}

// Independent K(k): p^(v_p(k)+1), or v_2(k)+2 for p = 2 with k even.
std::uint64_t K_oracle(unsigned k) {
    std::uint64_t K = 1;
    for (unsigned p = 2; p <= k + 1; ++p) {
        bool prime = true;
        for (unsigned d = 2; d * d <= p; ++d) prime = prime && p % d;
        if (!prime || k % (p - 1)) continue;
        unsigned theta = 0;
        for (unsigned m = k; m % p == 0; m /= p) ++theta;
        const unsigned gamma = (p == 2 && k % 2 == 0) ? theta + 2 : theta + 1;
        for (unsigned i = 0; i < gamma; ++i) K *= p;
    }
    return K;
}

}  // namespace

TEST_CASE("small sieves") {
    CHECK(elems(build_sieve({BaseKind::PowersOfNaturals, 2, 10})) ==
          std::vector<std::uint64_t>{1, 4, 9});
    CHECK(build_sieve({BaseKind::PowersOfNaturals, 2, 10}).count(10) == 3);
    CHECK(elems(build_sieve({BaseKind::PowersOfPrimes, 1, 10})) ==
          std::vector<std::uint64_t>{2, 3, 5, 7});
    CHECK(build_sieve({BaseKind::PowersOfPrimes, 1, 10}).count(10) == 4);
    CHECK(elems(build_sieve({BaseKind::PowersOfPrimes, 2, 50})) ==
          std::vector<std::uint64_t>{4, 9, 25, 49});
}

TEST_CASE("prime sieve agrees with trial division and known counts") {
    const auto primes = primes_up_to(100'000);
    std::vector<std::uint64_t> direct;
    for (std::uint64_t n = 2; n <= 100'000; ++n)
        if (is_prime_trial(n)) direct.push_back(n);
    CHECK(primes == direct);
    CHECK(primes_up_to(10'000'000).size() == 664'579);
    CHECK(primes_up_to(2).size() == 1);
    CHECK(primes_up_to(1).empty());
}

TEST_CASE("counting function is an exact prefix count") {
    const auto s = build_sieve({BaseKind::PowersOfPrimes, 1, 1'000'000});
    CHECK(s.count(0) == 0);
    CHECK(s.count(s.spec().limit) == s.size());
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t x = rng() % 1'000'001;
        std::uint64_t direct = 0;
        for (auto e : s.elements()) direct += e <= x;
        CHECK(s.count(x) == direct);
    }
    CHECK_THROWS_AS(s.count(1'000'001), ResourceError);
    CHECK(s.contains(999'983));
    CHECK_FALSE(s.contains(999'981));
}

TEST_CASE("membership implies a k-th power (of a prime)") {
    for (unsigned k = 1; k <= 4; ++k)
        for (auto kind : {BaseKind::PowersOfNaturals, BaseKind::PowersOfPrimes}) {
            const auto s = build_sieve({kind, k, 1'000'000});
            std::uint64_t prev = 0;
            for (auto e : s.elements()) {
                const auto m = integer_root(e, k);
                std::uint64_t back = 1;
                for (unsigned i = 0; i < k; ++i) back *= m;
                CHECK(back == e);
                if (kind == BaseKind::PowersOfPrimes) CHECK(is_prime_trial(m));
                CHECK(e > prev);
                prev = e;
            }
        }
}

TEST_CASE("regular variation of the counting function") {
    for (unsigned k = 1; k <= 3; ++k)
        for (auto kind : {BaseKind::PowersOfNaturals, BaseKind::PowersOfPrimes}) {
            if (kind == BaseKind::PowersOfPrimes && k > 2) continue;  // too few elements
            const auto s = build_sieve({kind, k, 80'000'000});
            for (double lambda : {2.0, 4.0, 8.0})
                for (double x : {1e6, 1e7}) {
                    const double ratio =
                        double(s.count(std::uint64_t(lambda * x))) / double(s.count(std::uint64_t(x)));
                    double target = std::pow(lambda, 1.0 / k);
                    // pi(y) ~ y / log y: the log factor converges too slowly for
                    // the bare band at lambda = 8 below x ~ 1e9.
                    if (kind == BaseKind::PowersOfPrimes) target *= std::log(x) / std::log(lambda * x);
                    CHECK(ratio >= 0.9 * target);
                    CHECK(ratio <= 1.1 * target);
                }
        }
}

TEST_CASE("invalid specs and budgets") {
    CHECK_THROWS_AS(build_sieve({BaseKind::PowersOfPrimes, 0, 10}), ConfigError);
    CHECK_THROWS_AS(build_sieve({BaseKind::PowersOfPrimes, 1, 1}), ConfigError);
    SieveOptions tight;
    tight.memory_budget = 1024;
    try {
        build_sieve({BaseKind::PowersOfPrimes, 1, 100'000'000}, tight);
        FAIL("expected a resource error");
    } catch (const ResourceError& e) {
        CHECK(std::string(e.what()).find("budget") != std::string::npos);
    }
    CHECK_THROWS_AS(SieveIndex({BaseKind::PowersOfPrimes, 1, 10}, {3, 2}), ConfigError);
}

TEST_CASE("sieve cache round-trip") {
    const auto path = std::filesystem::temp_directory_path() / "subbasis_test_cache.sbl";
    const auto s = build_sieve({BaseKind::PowersOfNaturals, 3, 1'000'000});
    save_sieve_cache(path, s);
    CHECK(std::filesystem::file_size(path) == 16 + 8 * s.size());
    const auto t = load_sieve_cache(path);
    CHECK(t.spec() == s.spec());
    CHECK(elems(t) == elems(s));
    std::filesystem::remove(path);
}

TEST_CASE("K(k) table and odd k") {
    const std::uint64_t table[] = {2, 24, 2, 240, 2, 504, 2, 480, 2, 264};
    for (unsigned k = 1; k <= 10; ++k) CHECK(compute_K(k) == table[k - 1]);
    for (unsigned k = 1; k <= 99; k += 2) CHECK(compute_K(k) == 2);
    for (unsigned k = 1; k <= 60; ++k) CHECK(compute_K(k) == K_oracle(k));
}

TEST_CASE("h star") {
    CHECK(h_star(1) == 3);
    CHECK(h_star(2) == 5);
    CHECK(h_star(11) == 2049);
    for (unsigned k = 12; k <= 30; ++k) {
        const long double lk = std::log(static_cast<long double>(k));
        const long double v = 2.0L * k * k * (2.0L * lk + std::log(lk) + 2.5L);
        CHECK(std::fabs(v - std::round(v)) > 1e-6L);  // the ceiling is well defined
        CHECK(h_star(k) == static_cast<std::uint64_t>(std::ceil(v)));
    }
    CHECK(h_star(12) == 2414);
}

TEST_CASE("power residue counts") {
    for (std::uint64_t q = 1; q <= 30; ++q)
        for (std::uint64_t a = 0; a < q; ++a) CHECK(count_power_residues(q, a, 1) == 1);
    CHECK(count_power_residues(8, 1, 2) == 4);
    CHECK(count_power_residues(3, 2, 2) == 0);
    CHECK_THROWS_AS(count_power_residues(1'000'001, 1, 2), SizeError);
    for (std::uint64_t q = 1; q <= 200; ++q) {
        bool squarefree = true;
        for (auto [p, e] : factorize(q)) squarefree = squarefree && e == 1;
        if (!squarefree) continue;
        for (unsigned k = 1; k <= 4; ++k) {
            std::uint64_t total = 0;
            for (std::uint64_t a = 0; a < q; ++a)
                if (std::gcd(a, q) == 1) total += count_power_residues(q, a, k);
            CHECK(total == euler_phi(q));
        }
    }
}

TEST_CASE("primes in arithmetic progressions") {
    const auto primes = build_sieve({BaseKind::PowersOfPrimes, 1, 10'000'000});
    CHECK(prime_count_AP(primes, 10, 4, 1).count == 1);
    CHECK(prime_count_AP(primes, 10, 4, 3).count == 2);
    const auto r = prime_count_AP(primes, 10'000'000, 3, 1);
    CHECK(std::abs(double(r.count) / r.main_term - 1.0) < 0.05);
    CHECK_THROWS_AS(prime_count_AP(primes, 10'000'001, 3, 1), ResourceError);
    for (std::uint64_t q : {5, 12, 30}) {
        const std::uint64_t x = 100'000;
        std::uint64_t total = 0, small = 0;
        for (std::uint64_t a = 1; a <= q; ++a)
            if (std::gcd(a, q) == 1) total += prime_count_AP(primes, x, q, a).count;
        for (auto [p, e] : factorize(q)) small += p <= x;
        CHECK(total == primes.count(x) - small);
    }
}

// verify.hpp
//
// Verification harness: exact expected representation counts, weighted
// main-term checks over prime powers and over k-th powers, concentration of
// sampled subbases, and diagnostics for the three structural conditions
// (regular variation, low additive energy, weighted solution counts).
//
// Every experiment yields a VerificationReport whose verdict is a pure
// function of its rows and declared band.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "subbasis/basesets.hpp"
#include "subbasis/regvar.hpp"
#include "subbasis/sampler.hpp"
#include "subbasis/singular.hpp"

namespace subbasis {

struct Band {
    double lo = 0.8;
    double hi = 1.25;
    bool contains(double r) const { return r >= lo && r <= hi; }
};

Band parse_band(const std::string& text);  // "lo,hi"

enum class VerdictRule { FractionInBand, MedianInBand };

struct ReportRow {
    std::uint64_t n = 0;
    std::string label;
    double empirical = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;
    // Relative truncation error of the singular series, |S(Q) - S(Q/2)| / S(Q);
    // the band is widened by it.
    double truncation = 0.0;
    bool in_class = true;
    bool in_band = false;
    std::optional<Band> band;  // per-row override of the report band
};

struct ReportSummary {
    std::size_t rows = 0;
    std::size_t in_class_rows = 0;
    std::size_t off_class_rows = 0;
    double median_ratio = 0.0;      // over in-class rows
    double fraction_in_band = 0.0;  // over in-class rows
    double in_class_median_empirical = 0.0;
    double off_class_median_empirical = 0.0;
    bool off_class_suppressed = true;  // off-class median <= 5% of in-class median
};

struct VerificationReport {
    std::string id;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    Band band;
    VerdictRule rule = VerdictRule::FractionInBand;
    double required_fraction = 0.8;
    std::vector<ReportRow> rows;
    std::vector<std::string> notes;
    ReportSummary summary;
    std::string verdict;  // "pass", "fail" or "pass-vacuous"

    // Fills ratio, in_band, summary and verdict from rows and the band.
    void finalize();
    bool passed() const { return verdict != "fail"; }

    nlohmann::ordered_json to_json() const;
    std::string json_text() const;  // pretty-printed, trailing newline
    std::string csv_text() const;   // header n,label,empirical,predicted,ratio,...
};

struct VerifyOptions {
    std::uint64_t memory_budget = std::uint64_t{1} << 30;
    double work_budget = 4e10;
    Band band;
    VerdictRule rule = VerdictRule::FractionInBand;
    double required_fraction = 0.8;
};

struct ExpectedRep {
    std::uint64_t n = 0;
    double exact = 0.0;      // c^h sum over solutions of prod f(x_i) / B(x_i)
    double singular = 0.0;   // truncated singular series at Q
    double predicted = 0.0;  // c^h S C_{B,h,f} f(n)^h / n
};

// Expectation of r_{A,h}(n) for the sampled model over a base sieve.
std::vector<ExpectedRep> expected_rep(const SieveIndex& base, const TargetDensity& density,
                                      double c, const std::vector<std::uint64_t>& ns,
                                      std::uint64_t Q, const VerifyOptions& options = {});

// Sum over x_i in P^k, x_1 + ... + x_h = n of prod x_i^(w - 1/k) log x_i,
// against S*(n) Gamma(w)^h / Gamma(h w) n^(h w - 1).
VerificationReport verify_goldbach_weighted(unsigned k, unsigned h, double omega,
                                            const std::vector<std::uint64_t>& ns, std::uint64_t Q,
                                            const VerifyOptions& options = {});

// Sum over x_i in N^k of prod x_i^(w - 1/k), against
// S(n) k^-h Gamma(w)^h / Gamma(h w) n^(h w - 1).
VerificationReport verify_waring_weighted(unsigned k, unsigned h, double omega,
                                          const std::vector<std::uint64_t>& ns, std::uint64_t Q,
                                          const VerifyOptions& options = {});

// r_{A,h}(n) for every n in [n_lo, n_hi] against S(n, Q) F(n). In-class n
// are n = h mod K(k) for prime powers and all n for powers of naturals.
VerificationReport verify_sampled_concentration(const SampledSubbasis& A, std::uint64_t n_lo,
                                                std::uint64_t n_hi, std::uint64_t Q,
                                                const VerifyOptions& options = {});

// Sanity mode on the full prime set: r_{P,3}(n) against the classical
// ternary main term S*(n) n^2 / (2 log^3 n), odd n in [n_lo, n_hi].
VerificationReport verify_full_prime_ternary(std::uint64_t n_lo, std::uint64_t n_hi,
                                             std::uint64_t Q, const VerifyOptions& options = {});

struct EnergyFit {
    unsigned ell = 2;
    std::vector<double> xs;
    std::vector<double> energies;
    double slope = 0.0;
    double expected = 0.0;  // 2 l / k - 1
};

EnergyFit energy_exponent(const SieveIndex& base, unsigned ell, const std::vector<double>& xs,
                          const VerifyOptions& options = {});

// Rows for B(lambda x)/B(x) against lambda^beta, energy slopes against
// 2l/k - 1, and one weighted-count cross-check against its main term.
VerificationReport condition_diagnostics(const BaseSetSpec& base,
                                         const std::vector<unsigned>& ells,
                                         const std::vector<double>& x_grid,
                                         const VerifyOptions& options = {});

}  // namespace subbasis
